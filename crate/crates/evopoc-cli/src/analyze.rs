//! `evopoc analyze` — preprocess, build working memory, synthesize, emit.

use std::path::{Path, PathBuf};

use clap::Args;
use evopoc::config::Config;
use evopoc::frontend::{filter_candidates, parse_dir, FilterConfig, ProjectModel};
use evopoc::fusion::{EmbeddingIndex, EmbeddingProvider, EmbeddingVector, HashedEmbedding};
use evopoc::memory::{
    build_working_memory, ContractContext, FunctionInfo, MemoryError, RelevanceOracle,
    ScriptedRelevanceOracle, WorkingMemory,
};
use evopoc::ontology::HkgGraph;
use evopoc::oracle::{
    BackendPlanOracle, BackendRelevanceOracle, HttpBackend, HttpBackendConfig, ScriptedBackend,
    Transcript,
};
use evopoc::pipeline::{exploit_synthesis, ExecutionEnv, FailureReason, PlanOracle, SynthesisOutcome};
use serde_json::json;

#[derive(Args)]
pub struct AnalyzeArgs {
    /// Project directories of Solidity sources.
    #[arg(required = true)]
    pub projects: Vec<PathBuf>,
    /// Execution environment JSON file.
    #[arg(long)]
    pub env: PathBuf,
    /// Reasoning backend: `scripted:<transcript.json>` or `live`.
    #[arg(long)]
    pub backend: String,
    /// Graph store path (defaults to the config's graph_store; an absent
    /// store means an empty long-term memory).
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Output directory for the outcome report and PoC file.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Analyze multiple project targets concurrently.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

/// Deterministic contract context from the filtered model: the analysis
/// summary a frontend pass produces without any model in the loop.
fn context_from_model(model: &ProjectModel) -> ContractContext {
    let mut summary = String::new();
    let mut functions = Vec::new();
    for contract in &model.contracts {
        summary.push_str(&format!(
            "{} {} with functions {} and state {}. ",
            contract.kind,
            contract.name,
            contract
                .functions
                .iter()
                .map(|f| f.name.as_str())
                .collect::<Vec<_>>()
                .join(" "),
            contract
                .state_vars
                .iter()
                .map(|v| v.name.as_str())
                .collect::<Vec<_>>()
                .join(" "),
        ));
        for f in &contract.functions {
            functions.push(FunctionInfo {
                name: f.name.clone(),
                visibility: f.visibility.to_string(),
                modifiers: f.modifiers.iter().map(|m| m.name.clone()).collect(),
            });
        }
    }
    let digest = format!("{:016x}", fnv(summary.as_bytes()));
    ContractContext {
        summary,
        functions,
        source_digest: digest,
    }
}

fn fnv(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x1000_0000_01b3);
    }
    h
}

enum Backends {
    Scripted(Box<ScriptedRelevanceOracle>, Box<BackendPlanOracle<ScriptedBackend>>),
    Live(
        Box<BackendRelevanceOracle<HttpBackend>>,
        Box<BackendPlanOracle<HttpBackend>>,
    ),
}

fn build_backends(spec: &str, config: &Config) -> Result<Backends, String> {
    if let Some(path) = spec.strip_prefix("scripted:") {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?;
        let transcript = Transcript::from_json_str(&text).map_err(|e| e.to_string())?;
        let relevance = ScriptedRelevanceOracle::new(transcript.relevance.clone());
        let backend = ScriptedBackend::new(transcript);
        Ok(Backends::Scripted(
            Box::new(relevance),
            Box::new(BackendPlanOracle::new(backend)),
        ))
    } else if spec == "live" {
        let mut http = HttpBackendConfig::from_env(&config.backend.credential_env)
            .or_else(|_| match &config.backend.url {
                Some(url) => Ok(HttpBackendConfig {
                    url: url.clone(),
                    ..HttpBackendConfig::default()
                }),
                None => Err("no backend URL configured".to_string()),
            })
            .map_err(|e| e.to_string())?;
        http.model = config.backend.model.clone();
        http.temperature = config.backend.temperature;
        http.timeout = std::time::Duration::from_secs(config.backend.timeout_secs);
        http.transport_retries = config.backend.transport_retries;
        http.max_in_flight = config.backend.max_in_flight;
        if http.credential.is_none() {
            http.credential = std::env::var(&config.backend.credential_env).ok();
        }
        let relevance = HttpBackend::new(http.clone()).map_err(|e| e.to_string())?;
        let plans = HttpBackend::new(http).map_err(|e| e.to_string())?;
        Ok(Backends::Live(
            Box::new(BackendRelevanceOracle::new(relevance)),
            Box::new(BackendPlanOracle::new(plans)),
        ))
    } else {
        Err(format!(
            "unknown backend spec `{spec}` (expected scripted:<path> or live)"
        ))
    }
}

fn load_graph(args_graph: &Option<PathBuf>, config: &Config) -> Result<HkgGraph, String> {
    let path = args_graph.clone().or_else(|| config.graph_store.clone());
    match path {
        Some(p) if p.exists() => {
            let text = std::fs::read_to_string(&p).map_err(|e| e.to_string())?;
            HkgGraph::from_json_str(&text).map_err(|e| e.to_string())
        }
        _ => Ok(HkgGraph::new()),
    }
}

pub fn analyze_one(
    project: &Path,
    args: &AnalyzeArgs,
    config: &Config,
    human: bool,
) -> u8 {
    let model = match parse_dir(project) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("{}: {e}", project.display());
            return 2;
        }
    };
    let filtered = filter_candidates(
        &model,
        &FilterConfig {
            trusted_globs: config.trusted_libs.clone(),
        },
    );
    if filtered.contracts.is_empty() {
        eprintln!("{}: no analyzable contracts after filtering", project.display());
        return 2;
    }
    let env = match std::fs::read_to_string(&args.env)
        .map_err(|e| e.to_string())
        .and_then(|t| ExecutionEnv::from_json_str(&t).map_err(|e| e.to_string()))
    {
        Ok(env) => env,
        Err(e) => {
            eprintln!("{}: {e}", args.env.display());
            return 2;
        }
    };
    let graph = match load_graph(&args.graph, config) {
        Ok(g) => g,
        Err(e) => {
            eprintln!("graph store: {e}");
            return 2;
        }
    };
    let provider = HashedEmbedding::new(config.embedding_dimension);
    let mut index = EmbeddingIndex::new(config.embedding_dimension);
    for node in graph.nodes() {
        let vector = match &node.embedding {
            Some(raw) if raw.len() == provider.dimension() => EmbeddingVector(raw.clone()),
            _ => provider.embed(&node.description),
        };
        index.insert(node.id.clone(), node.layer, node.kind, &vector);
    }

    let backends = match build_backends(&args.backend, config) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("backend: {e}");
            return 2;
        }
    };
    let scripted = matches!(backends, Backends::Scripted(..));
    let (mut relevance, mut plan_oracle): (Box<dyn RelevanceOracle>, Box<dyn PlanOracle>) =
        match backends {
            Backends::Scripted(r, p) => (r, p),
            Backends::Live(r, p) => (r, p),
        };

    let ctx = context_from_model(&filtered);
    let memory_config = config.memory_config();
    let wm = match build_working_memory(
        &graph,
        &index,
        &provider,
        &ctx,
        relevance.as_mut(),
        &memory_config,
    ) {
        Ok(wm) => wm,
        Err(MemoryError::NoSeedFound) if scripted => {
            // scripted mode bypasses working-memory grounding
            log::warn!(
                "{}: no retrieval seed in the knowledge graph; continuing with an empty working memory",
                project.display()
            );
            WorkingMemory::new(provider.embed(&ctx.summary))
        }
        Err(e) => {
            eprintln!("{}: working memory: {e}", project.display());
            return 2;
        }
    };

    let outcome = match exploit_synthesis(
        &wm,
        &env,
        &filtered,
        plan_oracle.as_mut(),
        &config.pipeline_config(),
    ) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("{}: synthesis: {e}", project.display());
            return 2;
        }
    };

    let stem = project
        .file_name()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| "project".into());
    if let Err(e) = std::fs::create_dir_all(&args.out) {
        eprintln!("output dir: {e}");
        return 2;
    }
    let (code, report) = match &outcome {
        SynthesisOutcome::Success {
            plan,
            poc,
            delta_w,
            iterations,
            diagnostics,
            ..
        } => {
            let poc_path = args.out.join(format!("{stem}_poc.t.sol"));
            if let Err(e) = std::fs::write(&poc_path, poc) {
                eprintln!("write poc: {e}");
                return 2;
            }
            (
                0u8,
                json!({
                    "project": project.display().to_string(),
                    "outcome": "success",
                    "iterations": iterations,
                    "delta_w": format!("{}/{}", delta_w.numer(), delta_w.denom()),
                    "plan_steps": plan.steps.len(),
                    "poc": poc_path.display().to_string(),
                    "diagnostics": diagnostics,
                }),
            )
        }
        SynthesisOutcome::Failure {
            reason,
            iterations,
            diagnostics,
        } => {
            let (code, label) = match reason {
                FailureReason::NotProfitable { .. } => (3u8, "not_profitable"),
                FailureReason::PathInfeasible { .. } => (4, "path_infeasible"),
                FailureReason::IterationBudgetExhausted => (5, "iteration_budget_exhausted"),
            };
            (
                code,
                json!({
                    "project": project.display().to_string(),
                    "outcome": label,
                    "reason": reason,
                    "iterations": iterations,
                    "diagnostics": diagnostics,
                }),
            )
        }
    };
    let outcome_path = args.out.join(format!("{stem}_outcome.json"));
    if let Err(e) = std::fs::write(
        &outcome_path,
        serde_json::to_string_pretty(&report).expect("json"),
    ) {
        eprintln!("write outcome: {e}");
        return 2;
    }
    if human {
        println!(
            "{}: {} (iterations {}) -> {}",
            project.display(),
            report["outcome"].as_str().unwrap_or("?"),
            report["iterations"],
            outcome_path.display()
        );
    } else {
        println!("{}", serde_json::to_string_pretty(&report).expect("json"));
    }
    code
}

pub fn run(args: AnalyzeArgs, config: &Config, human: bool) -> u8 {
    if args.jobs <= 1 || args.projects.len() <= 1 {
        let mut worst = 0u8;
        for project in &args.projects {
            worst = worst.max(analyze_one(project, &args, config, human));
        }
        return worst;
    }
    // each task owns its oracle session and shares the read-only inputs
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for chunk in args.projects.chunks(args.jobs.max(1)) {
            for project in chunk {
                let args_ref = &args;
                let config_ref = config;
                handles.push(scope.spawn(move || {
                    analyze_one(project, args_ref, config_ref, human)
                }));
            }
        }
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or(2))
            .max()
            .unwrap_or(0)
    })
}
