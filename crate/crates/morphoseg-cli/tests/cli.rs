//! Exit-code and stream contracts of the command-line front end.

use std::io::Write;
use std::process::{Command, Stdio};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_morphoseg")
}

fn run_with_stdin(args: &[&str], stdin: &str, dir: &std::path::Path) -> (String, String, i32) {
    let mut child = Command::new(bin())
        .args(args)
        .current_dir(dir)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(stdin.as_bytes())
        .unwrap();
    let out = child.wait_with_output().unwrap();
    (
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
        out.status.code().unwrap_or(-1),
    )
}

#[test]
fn happy_path_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let (stdout, stderr, code) =
        run_with_stdin(&["split-suffixes", "--lang", "de"], "Fischen\n", dir.path());
    assert_eq!(code, 0);
    assert_eq!(stdout, "Fisch $$en\n");
    assert_eq!(stderr, "");
}

#[test]
fn missing_required_flag_exits_two_with_usage() {
    let dir = tempfile::tempdir().unwrap();
    let (_, stderr, code) = run_with_stdin(&["split-compounds"], "", dir.path());
    assert_eq!(code, 2);
    assert!(stderr.to_lowercase().contains("usage"), "{stderr}");
    assert!(stderr.contains("--freq"), "{stderr}");
}

#[test]
fn unknown_subcommand_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let (_, _, code) = run_with_stdin(&["frobnicate"], "", dir.path());
    assert_eq!(code, 2);
}

#[test]
fn missing_resource_file_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let (_, stderr, code) = run_with_stdin(
        &["apply-bpe", "--bpe", "no-such-file.txt"],
        "x\n",
        dir.path(),
    );
    assert_eq!(code, 2);
    assert!(stderr.contains("no-such-file.txt"), "{stderr}");
}

#[test]
fn malformed_resource_file_exits_two_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.merges"), "#morphoseg-bpe v1\nonlyleft\n").unwrap();
    let (_, stderr, code) =
        run_with_stdin(&["apply-bpe", "--bpe", "bad.merges"], "x\n", dir.path());
    assert_eq!(code, 2);
    assert!(stderr.contains("bad.merges:2"), "{stderr}");
}

#[test]
fn dangling_separator_is_best_effort_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let (stdout, stderr, code) = run_with_stdin(
        &["desegment", "--strategy", "segmentation"],
        "Fisch @@\n",
        dir.path(),
    );
    assert_eq!(code, 1);
    assert_eq!(stdout, "Fisch\n");
    assert_eq!(stderr.lines().count(), 1, "{stderr}");
    assert!(stderr.starts_with("line 1:"), "{stderr}");
}

#[test]
fn strict_mode_aborts_on_malformed_stream() {
    let dir = tempfile::tempdir().unwrap();
    let (_, stderr, code) = run_with_stdin(
        &["desegment", "--strategy", "segmentation", "--strict"],
        "Fisch @@\n",
        dir.path(),
    );
    assert_eq!(code, 2);
    assert!(stderr.contains("--strict"), "{stderr}");
}

#[test]
fn segment_desegment_pipe_is_identity() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("corpus.txt"),
        "die Zierfische schwimmen\nZierfischen gefallen allen\n",
    )
    .unwrap();
    // prepare resources with the toolkit itself
    let steps: &[(&str, Vec<&str>)] = &[
        ("suffixed.txt", vec!["split-suffixes", "--lang", "de", "--input", "corpus.txt"]),
        ("freq.tsv", vec!["learn-freq", "--input", "suffixed.txt"]),
        ("split.txt", vec!["split-compounds", "--freq", "freq.tsv", "--input", "suffixed.txt"]),
        ("merges.txt", vec!["learn-bpe", "--merges", "200", "--input", "split.txt"]),
    ];
    for (out, args) in steps {
        let o = Command::new(bin()).args(args).current_dir(d).output().unwrap();
        assert!(o.status.success());
        std::fs::write(d.join(out), o.stdout).unwrap();
    }
    let input = "die Zierfischen mögen a@@b x## $$y\n";
    let (seg, _, code) = run_with_stdin(
        &[
            "segment", "--strategy", "segmentation", "--lang", "de",
            "--bpe", "merges.txt", "--freq", "freq.tsv",
        ],
        input,
        d,
    );
    assert_eq!(code, 0);
    let (deseg, _, code) = run_with_stdin(&["desegment", "--strategy", "segmentation"], &seg, d);
    assert_eq!(code, 0);
    assert_eq!(deseg, input);
}

#[test]
fn config_file_replaces_flags() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("freq.tsv"), "fisch\t30\tFisch\nzier\t12\tzier\n").unwrap();
    std::fs::write(d.join("job.conf"), "freq=freq.tsv\nmin-part-size=4\n").unwrap();
    let (stdout, _, code) = run_with_stdin(
        &["split-compounds", "--config", "job.conf"],
        "Zierfisch\n",
        d,
    );
    assert_eq!(code, 0);
    assert_eq!(stdout, "#U zier @@ Fisch\n");
    // explicit flags win over config values
    let (stdout, _, code) = run_with_stdin(
        &["split-compounds", "--config", "job.conf", "--min-part-size", "6"],
        "Zierfisch\n",
        d,
    );
    assert_eq!(code, 0);
    assert_eq!(stdout, "Zierfisch\n");
}

#[test]
fn version_names_format_versions() {
    let dir = tempfile::tempdir().unwrap();
    let (stdout, _, code) = run_with_stdin(&["--version"], "", dir.path());
    assert_eq!(code, 0);
    assert!(stdout.contains("morphoseg-bpe v1"), "{stdout}");
    assert!(stdout.contains("morphoseg-affix v1"), "{stdout}");
}

#[test]
fn decode_reports_orphans_and_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("inflex.tsv"), "Grenze\t<+NN>\tGrenzen\t5\n").unwrap();
    let (stdout, stderr, code) = run_with_stdin(
        &["decode-lemmatag", "--inflex", "inflex.tsv"],
        "<+NN> Grenze ok\n<+V><Inf>\n",
        dir.path(),
    );
    assert_eq!(code, 1);
    assert_eq!(stdout, "Grenzen ok\n\n");
    assert!(stderr.contains("line 2"), "{stderr}");
}

#[test]
fn empty_input_stays_empty() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["tokenize"],
        vec!["split-suffixes", "--lang", "de"],
        vec!["join-suffixes"],
        vec!["join-compounds"],
        vec!["merge-bpe"],
        vec!["hyphen-split"],
        vec!["desegment"],
    ] {
        let (stdout, _, code) = run_with_stdin(&args, "", dir.path());
        assert_eq!(code, 0, "{args:?}");
        assert_eq!(stdout, "", "{args:?}");
    }
}

#[test]
fn segment_with_truecase_model_and_revert() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    // interior evidence: "die" is lowercase
    std::fs::write(d.join("corpus.txt"), "und die Katze und die Maus\n").unwrap();
    let o = Command::new(bin())
        .args(["learn-truecase", "--input", "corpus.txt"])
        .current_dir(d)
        .output()
        .unwrap();
    std::fs::write(d.join("tc.tsv"), o.stdout).unwrap();
    std::fs::write(d.join("merges.txt"), "#morphoseg-bpe v1\nd i\ndi e\nK a\nKa t\nKat z\nKatz e\n").unwrap();
    let (seg, _, code) = run_with_stdin(
        &[
            "segment", "--strategy", "baseline",
            "--bpe", "merges.txt", "--truecase", "tc.tsv",
        ],
        "Die Katze\n",
        d,
    );
    assert_eq!(code, 0);
    assert_eq!(seg, "die Katze\n");
    let (back, _, code) = run_with_stdin(
        &["desegment", "--strategy", "baseline", "--truecase", "tc.tsv"],
        &seg,
        d,
    );
    assert_eq!(code, 0);
    // conventional sentence-initial capitalization is restored
    assert_eq!(back, "Die Katze\n");
}

#[test]
fn czech_segmentation_needs_no_frequency_lexicon() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("merges.txt"), "#morphoseg-bpe v1\nž e\nže n\nd o\ndo m\n").unwrap();
    let (seg, _, code) = run_with_stdin(
        &["segment", "--strategy", "segmentation", "--lang", "cs-light", "--bpe", "merges.txt"],
        "ženám\n",
        d,
    );
    assert_eq!(code, 0);
    assert_eq!(seg, "žen $$ám\n");
    let (back, _, code) = run_with_stdin(
        &["desegment", "--strategy", "segmentation", "--lang", "cs-light"],
        &seg,
        d,
    );
    assert_eq!(code, 0);
    assert_eq!(back, "ženám\n");
}

#[test]
fn paradigm_file_generates_unseen_forms() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    // the corpus never contains the dative plural of "Tag"
    std::fs::write(
        d.join("anno.tsv"),
        "Tag\tTag\t<+NN><Masc><Nom><Sg><NA>\n",
    )
    .unwrap();
    std::fs::write(
        d.join("paradigm.tsv"),
        "Tag\t<+NN><Masc><Dat><Pl><NA>\tTagen\t1\n",
    )
    .unwrap();
    let o = Command::new(bin())
        .args(["build-inflex", "--input", "anno.tsv", "--paradigm", "paradigm.tsv"])
        .current_dir(d)
        .output()
        .unwrap();
    assert!(o.status.success());
    std::fs::write(d.join("inflex.tsv"), o.stdout).unwrap();
    let (out, _, code) = run_with_stdin(
        &["decode-lemmatag", "--inflex", "inflex.tsv"],
        "<+NN><Masc><Dat><Pl><NA> Tag\n",
        d,
    );
    assert_eq!(code, 0);
    assert_eq!(out, "Tagen\n");
}

#[test]
fn joint_learning_concatenates_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("tgt.txt"), "lower\n").unwrap();
    std::fs::write(d.join("src.txt"), "low\n").unwrap();
    std::fs::write(d.join("cat.txt"), "lower\nlow\n").unwrap();
    let joint = Command::new(bin())
        .args([
            "learn-bpe", "--merges", "10", "--joint",
            "--input", "tgt.txt", "--more-input", "src.txt",
        ])
        .current_dir(d)
        .output()
        .unwrap();
    let concat = Command::new(bin())
        .args(["learn-bpe", "--merges", "10", "--input", "cat.txt"])
        .current_dir(d)
        .output()
        .unwrap();
    assert!(joint.status.success());
    assert_eq!(joint.stdout, concat.stdout);
}
