use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use walign::analysis::{
    bootstrap_aer, bootstrap_report, length_analysis, subset_analysis, AlignMethod, AnalysisReport, IbmMethod,
};
use walign::corpus::{
    parse_bitext, parse_conll, parse_embeddings, parse_pharaoh, serialize_conll, serialize_pharaoh, AlignmentSet,
    ConllOptions, ParallelCorpus, PharaohOptions,
};
use walign::embed::{align_all, ExtractorConfig};
use walign::eval::{evaluate, percent};
use walign::ibm::{decode, train, AlignmentModel, Direction, TrainConfig};
use walign::projection::{project, ProjectionConfig};
use walign::symmetrize::{dims, inferred_dims, symmetrize_corpus};

use crate::args::*;
use crate::Failure;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::data(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::data(format!("{}: {e}", path.display())))
}

fn in_file<T>(path: &Path, r: walign::Result<T>) -> Result<T, Failure> {
    r.map_err(|e| {
        let f = Failure::from(e);
        Failure { message: format!("{}: {}", path.display(), f.message), ..f }
    })
}

fn stdout(text: &str) -> Result<(), Failure> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| Failure::data(format!("standard output: {e}")))
}

/// A report: provenance header first, to the file or standard output.
fn emit_report(provenance: &str, body: &str, out: Option<&Path>) -> Result<(), Failure> {
    let text = format!("{provenance}\n{body}");
    match out {
        Some(p) => write(p, &text),
        None => stdout(&text),
    }
}

/// A data file: written verbatim, provenance to standard error.
fn emit_data(provenance: &str, body: &str, out: Option<&Path>) -> Result<(), Failure> {
    eprintln!("{provenance}");
    match out {
        Some(p) => write(p, body),
        None => stdout(body),
    }
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s: OsString = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn directions(d: DirectionArg) -> Vec<Direction> {
    match d {
        DirectionArg::Fwd => vec![Direction::Forward],
        DirectionArg::Rev => vec![Direction::Reverse],
        DirectionArg::Both => vec![Direction::Forward, Direction::Reverse],
    }
}

fn load_bitext(path: &Path) -> Result<ParallelCorpus, Failure> {
    in_file(path, parse_bitext(&read(path)?))
}

fn load_alignment(path: &Path, one_based: bool, corpus: Option<&ParallelCorpus>) -> Result<AlignmentSet, Failure> {
    in_file(path, parse_pharaoh(&read(path)?, PharaohOptions { one_based, corpus }))
}

fn train_config(m: &ModelArgs, seed: u64) -> TrainConfig {
    TrainConfig {
        kind: m.model,
        iterations: m.iters as usize,
        smoothing_alpha: m.alpha,
        initial_lambda: m.lambda,
        p0: m.p0,
        lambda_search: !m.no_lambda_search,
        seed,
    }
}

pub fn dispatch(command: &Command, provenance: &str) -> Result<(), Failure> {
    match command {
        Command::Train(a) => cmd_train(a, provenance),
        Command::Align(a) => cmd_align(a, provenance),
        Command::Symmetrize(a) => cmd_symmetrize(a, provenance),
        Command::EmbedAlign(a) => cmd_embed_align(a, provenance),
        Command::Evaluate(a) => cmd_evaluate(a, provenance),
        Command::Project(a) => cmd_project(a, provenance),
        Command::Analyze(AnalyzeCommand::Subset(a)) => cmd_subset(a, provenance),
        Command::Analyze(AnalyzeCommand::Length(a)) => cmd_length(a, provenance),
        Command::Analyze(AnalyzeCommand::Bootstrap(a)) => cmd_bootstrap(a, provenance),
    }
}

fn cmd_train(a: &TrainArgs, provenance: &str) -> Result<(), Failure> {
    let config = train_config(&a.model, a.common.seed);
    config.validate()?;
    let corpus = load_bitext(&a.bitext)?;
    let mut report = String::from("direction\titeration\tobjective\n");
    let mut summary = String::new();
    for direction in directions(a.direction) {
        let out = train(&corpus, direction, &config)?;
        for (k, ll) in out.ll_trace.iter().enumerate() {
            report.push_str(&format!("{direction}\t{}\t{ll:.6}\n", k + 1));
        }
        summary.push_str(&format!("# {direction} lambda {:.6}\n", out.model.params.lambda));
        let path = match a.direction {
            DirectionArg::Both => with_suffix(&a.out, &format!(".{direction}")),
            _ => a.out.clone(),
        };
        write(&path, &out.model.to_text())?;
    }
    report.push_str(&summary);
    emit_report(provenance, &report, None)
}

fn cmd_align(a: &AlignArgs, provenance: &str) -> Result<(), Failure> {
    if a.direction == DirectionArg::Both && a.out.is_none() {
        return Err(Failure::usage("--direction both needs --out"));
    }
    let corpus = load_bitext(&a.bitext)?;
    for direction in directions(a.direction) {
        let (model_path, out_path) = match a.direction {
            DirectionArg::Both => (
                with_suffix(&a.model, &format!(".{direction}")),
                a.out.as_ref().map(|o| with_suffix(o, &format!(".{direction}"))),
            ),
            _ => (a.model.clone(), a.out.clone()),
        };
        let model = in_file(&model_path, AlignmentModel::from_text(&read(&model_path)?))?;
        let alignment = decode(&corpus, &model, direction);
        emit_data(provenance, &serialize_pharaoh(&alignment), out_path.as_deref())?;
    }
    Ok(())
}

fn cmd_symmetrize(a: &SymmetrizeArgs, provenance: &str) -> Result<(), Failure> {
    let corpus = a.bitext.as_deref().map(load_bitext).transpose()?;
    let fwd = load_alignment(&a.forward, a.one_based, corpus.as_ref())?;
    let rev = load_alignment(&a.reverse, a.one_based, corpus.as_ref())?;
    let sizes = match &corpus {
        Some(c) => dims(c),
        None => inferred_dims(&fwd, &rev),
    };
    let out = symmetrize_corpus(&fwd, &rev, a.heuristic, &sizes)?;
    emit_data(provenance, &serialize_pharaoh(&out), a.out.as_deref())
}

fn cmd_embed_align(a: &EmbedAlignArgs, provenance: &str) -> Result<(), Failure> {
    let config = ExtractorConfig {
        threshold: a.threshold,
        temperature: a.temperature,
        layer: a.layer,
        aggregation: a.aggregation,
    };
    config.validate()?;
    let pairs = in_file(&a.embeddings, parse_embeddings(&read(&a.embeddings)?))?;
    let out = align_all(&pairs, &config)?;
    emit_data(provenance, &serialize_pharaoh(&out), a.out.as_deref())
}

fn cmd_evaluate(a: &EvaluateArgs, provenance: &str) -> Result<(), Failure> {
    let gold = load_alignment(&a.gold, a.one_based, None)?;
    let pred = load_alignment(&a.pred, a.one_based, None)?;
    let r = evaluate(&pred, &gold)?;
    let body = if a.json {
        serde_json::to_string_pretty(&r).expect("report serializes") + "\n"
    } else {
        format!(
            "AER {}\nprecision {}\nrecall {}\nf_measure {}\n",
            percent(r.aer),
            percent(r.precision),
            percent(r.recall),
            percent(r.f_measure)
        )
    };
    emit_report(provenance, &body, None)
}

fn cmd_project(a: &ProjectArgs, provenance: &str) -> Result<(), Failure> {
    let mut config = ProjectionConfig::new(a.task);
    config.type_threshold = a.beta;
    config.min_coverage = a.rho;
    if let Some(f) = &a.fallback {
        config.fallback_tag = f.clone();
    }
    config.tag_priority = a.tag_priority.clone();
    let tagged = in_file(&a.tags, parse_conll(&read(&a.tags)?, &ConllOptions::new(a.task)))?;
    config.validate(&tagged.tagset)?;
    let corpus = load_bitext(&a.bitext)?;
    let alignment = load_alignment(&a.alignment, a.one_based, Some(&corpus))?;
    let projection = project(&tagged, &alignment, &corpus, &config)?;
    let conll = serialize_conll(&projection.corpus);
    let stats = projection.stats.to_tsv();
    match &a.out {
        Some(path) => {
            write(path, &conll)?;
            emit_report(provenance, &stats, None)
        }
        None => {
            eprint!("{provenance}\n{stats}");
            stdout(&conll)
        }
    }
}

fn methods(e: &ExperimentArgs, seed: u64) -> Vec<IbmMethod> {
    e.models
        .iter()
        .map(|&kind| IbmMethod {
            config: TrainConfig {
                kind,
                iterations: e.iters as usize,
                smoothing_alpha: e.alpha,
                initial_lambda: e.lambda,
                p0: e.p0,
                lambda_search: true,
                seed,
            },
            heuristic: e.heuristic,
        })
        .collect()
}

struct Experiment {
    corpus: ParallelCorpus,
    test: ParallelCorpus,
    gold: AlignmentSet,
    methods: Vec<IbmMethod>,
}

fn load_experiment(e: &ExperimentArgs, seed: u64) -> Result<Experiment, Failure> {
    let methods = methods(e, seed);
    for m in &methods {
        m.config.validate()?;
    }
    let corpus = load_bitext(&e.corpus)?;
    let test = load_bitext(&e.test)?;
    let gold = load_alignment(&e.gold, e.one_based, Some(&test))?;
    Ok(Experiment { corpus, test, gold, methods })
}

fn render(report: &AnalysisReport, json: bool) -> String {
    if json {
        serde_json::to_string_pretty(report).expect("report serializes") + "\n"
    } else {
        report.to_tsv()
    }
}

fn cmd_subset(a: &SubsetArgs, provenance: &str) -> Result<(), Failure> {
    let x = load_experiment(&a.experiment, a.common.seed)?;
    let refs: Vec<&dyn AlignMethod> = x.methods.iter().map(|m| m as &dyn AlignMethod).collect();
    let r = subset_analysis(&x.corpus, &x.test, &x.gold, &a.sizes, &refs, a.common.seed)?;
    emit_report(provenance, &render(&r.report(), a.experiment.json), None)
}

fn cmd_length(a: &LengthArgs, provenance: &str) -> Result<(), Failure> {
    let x = load_experiment(&a.experiment, a.common.seed)?;
    let refs: Vec<&dyn AlignMethod> = x.methods.iter().map(|m| m as &dyn AlignMethod).collect();
    let r = length_analysis(&x.corpus, &x.test, &x.gold, a.group_size as usize, &refs)?;
    emit_report(provenance, &render(&r.report(), a.experiment.json), None)
}

fn cmd_bootstrap(a: &BootstrapArgs, provenance: &str) -> Result<(), Failure> {
    let gold = load_alignment(&a.gold, a.one_based, None)?;
    let mut rows = Vec::new();
    let mut seen = BTreeMap::new();
    for path in &a.pred {
        let pred = load_alignment(path, a.one_based, None)?;
        let summary = bootstrap_aer(&pred, &gold, a.samples as usize, a.size as usize, a.common.seed)?;
        let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let n = seen.entry(stem.clone()).or_insert(0);
        *n += 1;
        let label = if *n == 1 { stem } else { format!("{stem}#{n}") };
        rows.push((label, summary));
    }
    let report = bootstrap_report(&rows, a.samples as usize, a.size as usize, a.common.seed);
    emit_report(provenance, &render(&report, a.json), None)
}
