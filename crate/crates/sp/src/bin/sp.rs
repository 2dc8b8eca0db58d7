//! Thin command-line front end over the library.
//!
//! Exit codes: 0 when at least one alignment was produced (or the command
//! succeeded), 1 when a search legitimately found nothing, 2 on input or
//! usage errors.

use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};

use sp::builder::{build_alignments, msa_build, SearchParams};
use sp::grammar::CostKind;
use sp::io::{load_corpus, load_grammar, save_grammar, AlignmentRecord};
use sp::learn::{learn, LearnParams};
use sp::pattern::Pattern;
use sp::render::{render_alignment, RenderOptions};
use sp::score::relative_probabilities;

#[derive(Parser)]
#[command(name = "sp", version, about = "Alignment, compression scoring, and grammar learning over symbol sequences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum CostModelArg {
    Uniform,
    Frequency,
}

impl From<CostModelArg> for CostKind {
    fn from(v: CostModelArg) -> CostKind {
        match v {
            CostModelArg::Uniform => CostKind::Uniform,
            CostModelArg::Frequency => CostKind::Frequency,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Build and render the best alignments of New patterns against a grammar
    Align {
        #[arg(long)]
        grammar: String,
        #[arg(long)]
        new: String,
        #[arg(long, default_value_t = 200)]
        beam: usize,
        #[arg(long = "max-stages", default_value_t = 20)]
        max_stages: usize,
        #[arg(long, default_value_t = 10)]
        top: usize,
        #[arg(long = "cost-model", value_enum, default_value = "uniform")]
        cost_model: CostModelArg,
        #[arg(long)]
        json: bool,
    },
    /// Multiple alignment of plain sequences, scored by unification saving
    Msa {
        #[arg(long)]
        patterns: String,
        #[arg(long, default_value_t = 200)]
        beam: usize,
        #[arg(long)]
        json: bool,
    },
    /// Learn a grammar from a corpus by description-length search
    Learn {
        #[arg(long)]
        corpus: String,
        #[arg(long)]
        out: String,
        #[arg(long = "grammar-beam", default_value_t = 10)]
        grammar_beam: usize,
        #[arg(long, default_value_t = 3)]
        passes: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long = "cost-model", value_enum, default_value = "uniform")]
        cost_model: CostModelArg,
    },
    /// Print scores, codes, and probabilities without rendering
    Score {
        #[arg(long)]
        grammar: String,
        #[arg(long)]
        new: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(found) => {
            if found {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn align_one(
    member: &Arc<Pattern>,
    grammar: &sp::grammar::Grammar,
    params: &SearchParams,
    kind: CostKind,
) -> sp::Result<Vec<sp::builder::RankedAlignment>> {
    let cm = grammar.cost_model_with(kind, std::slice::from_ref(member))?;
    let mut results = build_alignments(member, grammar, params, &cm)?;
    let mut encodings: Vec<_> = results.iter().map(|r| r.result.clone()).collect();
    relative_probabilities(&mut encodings);
    for (r, e) in results.iter_mut().zip(encodings) {
        r.result = e;
    }
    Ok(results)
}

fn run(cmd: Command) -> sp::Result<bool> {
    match cmd {
        Command::Align { grammar, new, beam, max_stages, top, cost_model, json } => {
            let (g, warnings) = load_grammar(&grammar)?;
            for w in warnings {
                eprintln!("warning: {w}");
            }
            let members = load_corpus(&new)?;
            let params = SearchParams {
                beam_width: beam,
                max_stages,
                top_k: top,
                min_hits: 1,
            };
            let mut found = false;
            let mut records: Vec<AlignmentRecord> = Vec::new();
            for member in &members {
                let results = align_one(member, &g, &params, cost_model.into())?;
                if results.is_empty() {
                    if !json {
                        println!("no alignment for `{}`", member.tokens.join(" "));
                    }
                    continue;
                }
                found = true;
                for (i, r) in results.iter().enumerate() {
                    if json {
                        records.push(AlignmentRecord::from_alignment(&r.alignment, &r.result));
                    } else {
                        println!(
                            "alignment {} of `{}`: cd = {:.3} bits, p = {:.4}",
                            i + 1,
                            member.tokens.join(" "),
                            r.result.cd,
                            r.result.probability.unwrap_or(1.0),
                        );
                        println!("{}", render_alignment(&r.alignment, &RenderOptions::default())?);
                    }
                }
            }
            if json {
                println!("{}", serde_json::to_string_pretty(&records).expect("records serialize"));
            }
            Ok(found)
        }
        Command::Msa { patterns, beam, json } => {
            let seqs = load_corpus(&patterns)?;
            let params = SearchParams { beam_width: beam, ..SearchParams::default() };
            let (alignment, u) = msa_build(&seqs, &params)?;
            if json {
                let doc = serde_json::json!({
                    "rows": alignment.rows().iter().map(|p| p.tokens.clone()).collect::<Vec<_>>(),
                    "columns": alignment.columns().iter().map(|c| {
                        c.entries().iter().map(|&(r, p)| (r.to_string(), p)).collect::<std::collections::BTreeMap<_, _>>()
                    }).collect::<Vec<_>>(),
                    "unification_saving": u,
                });
                println!("{}", serde_json::to_string_pretty(&doc).expect("doc serializes"));
            } else {
                println!("{}", render_alignment(&alignment, &RenderOptions::default())?);
                println!("U = {u:.3} bits");
            }
            Ok(true)
        }
        Command::Learn { corpus, out, grammar_beam, passes, seed, cost_model } => {
            let members = load_corpus(&corpus)?;
            let params = LearnParams {
                grammar_beam,
                max_passes: passes,
                id_seed: seed,
                cost_kind: cost_model.into(),
                ..LearnParams::default()
            };
            let ranked = learn(&members, &params)?;
            let best = ranked.first().ok_or_else(|| {
                sp::Error::Invalid("learning produced no grammar".into())
            })?;
            save_grammar(&best.grammar, &out)?;
            println!("T = {:.3} bits  G = {:.3} bits  E = {:.3} bits", best.t, best.g_bits, best.e_bits);
            println!("wrote {} patterns to {}", best.grammar.len(), out);
            Ok(true)
        }
        Command::Score { grammar, new } => {
            let (g, warnings) = load_grammar(&grammar)?;
            for w in warnings {
                eprintln!("warning: {w}");
            }
            let members = load_corpus(&new)?;
            let params = SearchParams::default();
            let mut found = false;
            for member in &members {
                let results = align_one(member, &g, &params, CostKind::Uniform)?;
                if results.is_empty() {
                    println!("no alignment for `{}`", member.tokens.join(" "));
                    continue;
                }
                found = true;
                for (i, r) in results.iter().enumerate() {
                    println!(
                        "{}  cd = {:.3}  b_new = {:.3}  b_code = {:.3}  p = {:.4}  code: {}",
                        i + 1,
                        r.result.cd,
                        r.result.b_new,
                        r.result.b_code,
                        r.result.probability.unwrap_or(1.0),
                        r.result.code.join(" "),
                    );
                }
            }
            Ok(found)
        }
    }
}
