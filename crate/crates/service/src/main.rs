use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};

use forge_core::qa::UserAnswers;
use forge_core::texture::load_tree;
use forge_core::Language;
use forge_service::session::IterateOutcome;
use forge_service::{NewSession, Orchestrator, Runtime, ServiceConfig};

#[derive(Parser)]
#[command(name = "forge", version, about = "Feedback-driven WordArt design sessions")]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true, env = "FORGE_CONFIG")]
    config: Option<PathBuf>,
    /// Overrides `data_dir` from the configuration.
    #[arg(long, global = true, env = "FORGE_DATA_DIR")]
    data_dir: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Create a session and print its id.
    New {
        #[arg(long)]
        prompt: String,
        #[arg(long, default_value = "en")]
        lang: Language,
        #[arg(long)]
        interactive: bool,
        #[arg(long = "style-hint")]
        style_hints: Vec<String>,
        /// JSON overlay on the configured hyperparameters.
        #[arg(long)]
        params: Option<String>,
    },
    /// Run the next iteration (interactive) or the whole budget.
    Iterate { id: String },
    /// Queue answers for the next iteration.
    Feedback {
        id: String,
        #[arg(long)]
        cos: Option<f64>,
        #[arg(long)]
        qua: Option<f64>,
        #[arg(long)]
        gly: Option<f64>,
        /// Preference as key=value; repeatable.
        #[arg(long = "pref")]
        prefs: Vec<String>,
        #[arg(long, default_value = "")]
        text: String,
        #[arg(long)]
        glyph_complaint: bool,
    },
    /// Print the session as JSON.
    Show { id: String },
    List,
    Questions { id: String },
    /// Print the log without timestamps or session ids.
    Canon { id: String },
    Export { id: String, dest: PathBuf },
    Import { src: PathBuf },
    Tree {
        #[command(subcommand)]
        cmd: TreeCmd,
    },
    Serve {
        #[arg(long)]
        listen: Option<String>,
    },
}

#[derive(Subcommand)]
enum TreeCmd {
    /// Check a model tree file.
    Validate { path: PathBuf },
}

fn load_config(cli: &Cli) -> anyhow::Result<ServiceConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ServiceConfig::load(p)?,
        None => ServiceConfig::default(),
    };
    if let Some(d) = &cli.data_dir {
        cfg.data_dir = d.clone();
    }
    Ok(cfg)
}

fn print_json(v: &impl serde::Serialize) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn report(out: &IterateOutcome) {
    for r in &out.records {
        let artifact = r.artifact_ref.as_ref().map_or("-".to_string(), |a| a.0.clone());
        match (r.score, &r.error) {
            (Some(s), _) => println!("iteration {}: score {s:.4} artifact {artifact}", r.index),
            (None, Some(e)) => println!("iteration {}: failed: {e}", r.index),
            (None, None) => println!("iteration {}: unscored", r.index),
        }
    }
    println!("status: {}", out.session.status);
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Cmd::Tree { cmd: TreeCmd::Validate { path } } = &cli.cmd {
        let tree = load_tree(path)?;
        println!("{} leaves, depth {}", tree.leaf_count(), tree.depth());
        return Ok(());
    }
    let cfg = load_config(&cli)?;
    let listen = cfg.listen.clone();
    let o = Orchestrator::new(Runtime::new(cfg)?);
    match cli.cmd {
        Cmd::New { prompt, lang, interactive, style_hints, params } => {
            let params = params.map(|p| serde_json::from_str(&p)).transpose().context("--params")?;
            let s = o.create(NewSession {
                prompt,
                language: Some(lang),
                style_hints,
                interactive: interactive.then_some(true),
                params,
            })?;
            println!("{}", s.id);
        }
        Cmd::Iterate { id } => report(&o.iterate(&id)?),
        Cmd::Feedback { id, cos, qua, gly, prefs, text, glyph_complaint } => {
            let mut answers = UserAnswers { g_cos: cos, g_qua: qua, g_gly: gly, free_text: text, glyph_complaint, ..Default::default() };
            for p in prefs {
                let Some((k, v)) = p.split_once('=') else { bail!("--pref expects key=value, got `{p}`") };
                answers.g_pref.insert(k.trim().to_string(), v.trim().to_string());
            }
            let s = o.submit_feedback(&id, answers)?;
            println!("queued; {} pending", s.pending.len());
        }
        Cmd::Show { id } => print_json(&forge_service::api::SessionView::from(o.get(&id)?))?,
        Cmd::List => {
            for id in o.list()? {
                println!("{id}");
            }
        }
        Cmd::Questions { id } => print_json(&o.questions(&id)?)?,
        Cmd::Canon { id } => print!("{}", o.canonical_log(&id)?),
        Cmd::Export { id, dest } => {
            let m = o.export(&id, &dest)?;
            println!("exported {} with {} artifacts", m.session, m.artifacts.len());
        }
        Cmd::Import { src } => println!("{}", o.import(&src)?.id),
        Cmd::Serve { listen: l } => {
            let addr = l.unwrap_or(listen);
            tokio::runtime::Runtime::new()?.block_on(forge_service::api::serve(Arc::new(o), &addr))?;
        }
        Cmd::Tree { .. } => unreachable!(),
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
