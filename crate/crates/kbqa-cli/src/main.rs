//! Batch-first command-line interface over the kbqa library.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use kbqa::dataset::{read_predictions, read_records, write_records, DatasetRecord};
use kbqa::enumerate::enumerate_candidates;
use kbqa::genpipe::{
    build_pools, generate_templates, read_paraphrases, sample_records, split_dataset,
    SamplerState, DEFAULT_RHO_L, DEFAULT_RHO_P,
};
use kbqa::linker::{detect_mentions, disambiguate, SurfaceLexicon};
use kbqa::metrics::{
    aggregate, answer_f1, exact_match_diagnostic, robustness_bounds, EvalOutcome, Grouping,
};
use kbqa::rank::{answer_traced, rank_candidates, EmbeddingTable};
use kbqa::sexpr::{evaluate, parse, typecheck};
use kbqa::sparql::{to_sparql, DEFAULT_PREFIX};
use kbqa::{EntityId, KnowledgeBase};

#[derive(Parser)]
#[command(
    name = "kbqa",
    about = "Question answering over knowledge bases: load, link, enumerate, rank, evaluate, and generate datasets",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct KbArgs {
    /// Ontology TSV: relation<TAB>domain<TAB>range
    #[arg(long)]
    kb_ontology: PathBuf,
    /// Facts TSV: subject<TAB>relation<TAB>object
    #[arg(long)]
    kb_facts: PathBuf,
}

impl KbArgs {
    fn load(&self) -> Result<KnowledgeBase, CliError> {
        let ontology = open(&self.kb_ontology)?;
        let facts = open(&self.kb_facts)?;
        KnowledgeBase::load(ontology, facts).map_err(input)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Load a knowledge base and print its statistics
    LoadCheck {
        #[command(flatten)]
        kb: KbArgs,
    },
    /// Answer a question end to end
    Ask {
        #[command(flatten)]
        kb: KbArgs,
        #[arg(long)]
        lexicon: PathBuf,
        #[arg(long)]
        embeddings: PathBuf,
        /// The question text
        #[arg(long)]
        q: String,
        #[arg(long, default_value_t = 2000)]
        limit: usize,
        #[arg(long, default_value_t = 1)]
        topk: usize,
    },
    /// Detect and disambiguate entity mentions
    Link {
        #[arg(long)]
        lexicon: PathBuf,
        #[arg(long)]
        q: String,
        #[arg(long, default_value_t = 1)]
        topk: usize,
    },
    /// Enumerate candidate logical forms for anchor entities
    Enumerate {
        #[command(flatten)]
        kb: KbArgs,
        /// Comma-separated anchor entity ids
        #[arg(long)]
        anchors: String,
        #[arg(long, default_value_t = 2000)]
        limit: usize,
    },
    /// Rank the candidates for a question
    Rank {
        #[command(flatten)]
        kb: KbArgs,
        #[arg(long)]
        lexicon: PathBuf,
        #[arg(long)]
        embeddings: PathBuf,
        #[arg(long)]
        q: String,
        #[arg(long, default_value_t = 2000)]
        limit: usize,
        #[arg(long, default_value_t = 1)]
        topk: usize,
    },
    /// Score predictions against gold records
    Eval {
        #[command(flatten)]
        kb: KbArgs,
        /// Predictions: qid<TAB>s_expression
        #[arg(long)]
        pred: PathBuf,
        /// Gold records (JSON lines)
        #[arg(long)]
        gold: PathBuf,
        /// Write machine-readable metric lines here
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Split records into train/dev/test with generalization levels
    Split {
        #[command(flatten)]
        kb: KbArgs,
        #[arg(long)]
        gold: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output prefix; writes <out>.train.jsonl, <out>.dev.jsonl, <out>.test.jsonl
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a synthetic dataset from the ontology
    Generate {
        #[command(flatten)]
        kb: KbArgs,
        /// Number of records to sample
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 2)]
        max_relations: usize,
        #[arg(long, default_value_t = 50)]
        max_groundings: usize,
        #[arg(long, default_value_t = 500)]
        max_templates: usize,
        /// Optional paraphrase pool: template_id<TAB>text with [slots]
        #[arg(long)]
        paraphrases: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_RHO_L)]
        rho_l: f64,
        #[arg(long, default_value_t = DEFAULT_RHO_P)]
        rho_p: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output path; stdout when omitted
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit the SPARQL query for a logical form
    Sparql {
        /// The S-expression
        #[arg(long)]
        expr: String,
        #[arg(long, default_value = DEFAULT_PREFIX)]
        prefix: String,
        /// Typecheck against this ontology first
        #[arg(long, requires = "kb_facts")]
        kb_ontology: Option<PathBuf>,
        #[arg(long, requires = "kb_ontology")]
        kb_facts: Option<PathBuf>,
    },
}

enum CliError {
    Input(anyhow::Error),
    Internal(anyhow::Error),
}

fn input(e: impl Into<anyhow::Error>) -> CliError {
    CliError::Input(e.into())
}

fn internal(e: impl Into<anyhow::Error>) -> CliError {
    CliError::Internal(e.into())
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .with_context(|| format!("cannot open {}", path.display()))
        .map(BufReader::new)
        .map_err(CliError::Input)
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match run(cli) {
        Ok(()) => {}
        Err(CliError::Input(e)) => {
            eprintln!("error: {e:#}");
            std::process::exit(1);
        }
        Err(CliError::Internal(e)) => {
            eprintln!("internal error: {e:#}");
            std::process::exit(2);
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::LoadCheck { kb } => {
            let kb = kb.load()?;
            println!("entities\t{}", kb.entity_count());
            println!("relations\t{}", kb.relation_count());
            println!("facts\t{}", kb.fact_count());
            println!("classes\t{}", kb.classes().count());
            Ok(())
        }
        Command::Ask {
            kb,
            lexicon,
            embeddings,
            q,
            limit,
            topk,
        } => {
            let kb = kb.load()?;
            let lexicon = SurfaceLexicon::load(open(&lexicon)?).map_err(input)?;
            let table = EmbeddingTable::load(open(&embeddings)?).map_err(input)?;
            let (expr, denotation, _) = answer_traced(&q, &kb, &lexicon, &table, limit, topk);
            match (expr, denotation) {
                (Some(expr), Some(denotation)) => {
                    println!("{expr}");
                    println!("{denotation}");
                }
                _ => {
                    println!("none");
                    println!("none");
                }
            }
            Ok(())
        }
        Command::Link { lexicon, q, topk } => {
            let lexicon = SurfaceLexicon::load(open(&lexicon)?).map_err(input)?;
            for mention in detect_mentions(&q, &lexicon) {
                let bindings = disambiguate(&mention, &lexicon, topk).map_err(internal)?;
                let rendered: Vec<String> = bindings
                    .iter()
                    .map(|(e, f)| format!("{e}:{f}"))
                    .collect();
                println!(
                    "{}\t{}\t{}\t{}",
                    mention.start,
                    mention.end,
                    mention.surface,
                    rendered.join(",")
                );
            }
            Ok(())
        }
        Command::Enumerate {
            kb,
            anchors,
            limit,
        } => {
            let kb = kb.load()?;
            let anchors: BTreeSet<EntityId> = anchors
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(EntityId::new)
                .collect();
            if anchors.is_empty() {
                return Err(input(anyhow!("--anchors must name at least one entity")));
            }
            let set = enumerate_candidates(&kb, &anchors, limit);
            for candidate in &set.candidates {
                println!("{candidate}");
            }
            if set.truncated {
                eprintln!("note: candidate list truncated at {limit}");
            }
            Ok(())
        }
        Command::Rank {
            kb,
            lexicon,
            embeddings,
            q,
            limit,
            topk,
        } => {
            let kb = kb.load()?;
            let lexicon = SurfaceLexicon::load(open(&lexicon)?).map_err(input)?;
            let table = EmbeddingTable::load(open(&embeddings)?).map_err(input)?;
            let mentions = detect_mentions(&q, &lexicon);
            let mut anchors = BTreeSet::new();
            for mention in &mentions {
                anchors.extend(
                    disambiguate(mention, &lexicon, topk)
                        .map_err(internal)?
                        .into_iter()
                        .map(|(e, _)| e),
                );
            }
            if anchors.is_empty() {
                return Ok(());
            }
            let candidates = enumerate_candidates(&kb, &anchors, limit);
            for scored in rank_candidates(&q, &candidates, &table) {
                println!("{:.6}\t{}", scored.score, scored.candidate);
            }
            Ok(())
        }
        Command::Eval { kb, pred, gold, out } => {
            let kb = kb.load()?;
            let preds: BTreeMap<String, String> = read_predictions(open(&pred)?)
                .map_err(input)?
                .into_iter()
                .collect();
            let gold = read_records(open(&gold)?).map_err(input)?;
            let outcomes = evaluate_records(&kb, &preds, &gold)?;
            let report = aggregate(&outcomes);
            print!("{report}");
            for grouping in [Grouping::Template, Grouping::Paraphrase] {
                if let Ok(bounds) = robustness_bounds(&outcomes, grouping) {
                    println!(
                        "robustness ({grouping})  lower {:.2}  accuracy {:.2}  upper {:.2}",
                        bounds.lower, bounds.accuracy, bounds.upper
                    );
                }
            }
            if let Some(path) = out {
                let mut file = File::create(&path)
                    .with_context(|| format!("cannot create {}", path.display()))
                    .map_err(CliError::Input)?;
                file.write_all(report.machine_lines().as_bytes())
                    .map_err(internal)?;
            }
            Ok(())
        }
        Command::Split {
            kb,
            gold,
            seed,
            out,
        } => {
            let kb = kb.load()?;
            let records = read_records(open(&gold)?).map_err(input)?;
            let split = split_dataset(&records, &kb, seed).map_err(input)?;
            for (name, records) in [
                ("train", &split.train),
                ("dev", &split.dev),
                ("test", &split.test),
            ] {
                let path = out.with_extension(format!("{name}.jsonl"));
                let file = File::create(&path)
                    .with_context(|| format!("cannot create {}", path.display()))
                    .map_err(CliError::Input)?;
                write_records(records, file).map_err(internal)?;
                println!("{name}\t{}\t{}", records.len(), path.display());
            }
            Ok(())
        }
        Command::Generate {
            kb,
            count,
            max_relations,
            max_groundings,
            max_templates,
            paraphrases,
            rho_l,
            rho_p,
            seed,
            out,
        } => {
            let kb = kb.load()?;
            if !(1..=4).contains(&max_relations) {
                return Err(input(anyhow!("--max-relations must be in 1..=4")));
            }
            let templates = generate_templates(&kb, max_relations, max_templates);
            let paraphrase_pools = match paraphrases {
                Some(path) => read_paraphrases(open(&path)?).map_err(input)?,
                None => BTreeMap::new(),
            };
            let pools = build_pools(&kb, &templates, &paraphrase_pools, max_groundings);
            if pools.is_empty() {
                return Err(input(anyhow!("no template has a compatible grounding")));
            }
            let mut state = SamplerState::new(&pools, rho_l, rho_p, seed);
            let records = sample_records(&pools, &mut state, count).map_err(input)?;
            match out {
                Some(path) => {
                    let file = File::create(&path)
                        .with_context(|| format!("cannot create {}", path.display()))
                        .map_err(CliError::Input)?;
                    write_records(&records, file).map_err(internal)?;
                }
                None => {
                    let stdout = std::io::stdout().lock();
                    write_records(&records, stdout).map_err(internal)?;
                }
            }
            Ok(())
        }
        Command::Sparql {
            expr,
            prefix,
            kb_ontology,
            kb_facts,
        } => {
            let expr = parse(&expr).map_err(input)?;
            if let (Some(ontology), Some(facts)) = (kb_ontology, kb_facts) {
                let kb = KnowledgeBase::load(open(&ontology)?, open(&facts)?).map_err(input)?;
                typecheck(&expr, &kb).map_err(input)?;
            }
            println!("{}", to_sparql(&expr, &prefix).map_err(input)?);
            Ok(())
        }
    }
}

fn evaluate_records(
    kb: &KnowledgeBase,
    preds: &BTreeMap<String, String>,
    gold: &[DatasetRecord],
) -> Result<Vec<EvalOutcome>, CliError> {
    let mut outcomes = Vec::with_capacity(gold.len());
    for record in gold {
        let gold_expr = parse(&record.s_expression)
            .map_err(|e| input(anyhow!("gold record {}: {e}", record.qid)))?;
        let gold_answers: BTreeSet<String> = record.answers.iter().cloned().collect();
        let pred_text = preds.get(&record.qid).map(String::as_str).unwrap_or("");
        let (em, pred_answers) = match parse(pred_text) {
            Ok(pred_expr) => {
                let (em, diagnostic) = exact_match_diagnostic(&pred_expr, &gold_expr);
                if let Some(diagnostic) = diagnostic {
                    eprintln!("note: {}: {diagnostic}", record.qid);
                }
                let answers = evaluate(&pred_expr, kb)
                    .map(|d| {
                        d.into_answers()
                            .into_iter()
                            .map(|o| o.to_string())
                            .collect::<BTreeSet<String>>()
                    })
                    .unwrap_or_default();
                (em, answers)
            }
            Err(_) => (false, BTreeSet::new()),
        };
        outcomes.push(EvalOutcome {
            qid: record.qid.clone(),
            em,
            f1: answer_f1(&pred_answers, &gold_answers),
            level: record.level,
            template_id: Some(record.template_id.clone()),
            paraphrase_id: Some(record.paraphrase_id.clone()),
        });
    }
    Ok(outcomes)
}
