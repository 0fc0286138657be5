//! `evopoc hkg` — ingest case files, report fusion outcomes, print stats,
//! export the store.

use std::path::PathBuf;

use clap::Subcommand;
use evopoc::config::Config;
use evopoc::fusion::{
    ingest_case, ingest_import, CaseSubgraph, CosineJudge, EmbeddingIndex, EmbeddingProvider,
    EmbeddingVector, FusionReport, HashedEmbedding,
};
use evopoc::ontology::{EdgeKind, HkgGraph, LayerTag};
use serde_json::json;

#[derive(Subcommand)]
pub enum HkgCommand {
    /// Consume case files into the store and print a fusion report.
    Ingest {
        files: Vec<PathBuf>,
        #[arg(long)]
        store: Option<PathBuf>,
    },
    /// Dry-run ingest: report what fusion would do without mutating the store.
    FuseReport {
        files: Vec<PathBuf>,
        #[arg(long)]
        store: Option<PathBuf>,
    },
    /// Per-layer node counts and per-kind edge counts.
    Stats {
        #[arg(long)]
        store: Option<PathBuf>,
    },
    /// Write the graph serialization format.
    Export {
        #[arg(long)]
        store: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn store_path(flag: &Option<PathBuf>, config: &Config) -> Result<PathBuf, String> {
    flag.clone()
        .or_else(|| config.graph_store.clone())
        .ok_or_else(|| "no graph store path (use --store or config graph_store)".to_string())
}

fn load_store(path: &PathBuf) -> Result<HkgGraph, String> {
    if !path.exists() {
        return Ok(HkgGraph::new());
    }
    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    HkgGraph::from_json_str(&text).map_err(|e| e.to_string())
}

fn build_index(
    graph: &HkgGraph,
    provider: &dyn EmbeddingProvider,
) -> EmbeddingIndex {
    let mut index = EmbeddingIndex::new(provider.dimension());
    for node in graph.nodes() {
        let vector = match &node.embedding {
            Some(raw) if raw.len() == provider.dimension() => EmbeddingVector(raw.clone()),
            _ => provider.embed(&node.description),
        };
        index.insert(node.id.clone(), node.layer, node.kind, &vector);
    }
    index
}

fn ingest_files(
    graph: &mut HkgGraph,
    index: &mut EmbeddingIndex,
    provider: &dyn EmbeddingProvider,
    files: &[PathBuf],
    config: &Config,
) -> Result<Vec<(String, FusionReport)>, (u8, String)> {
    let mut reports = Vec::new();
    let fusion_config = config.fusion_config();
    let mut judge = CosineJudge {
        tau: config.fusion.tau,
    };
    for file in files {
        let text = std::fs::read_to_string(file).map_err(|e| (2, format!("{}: {e}", file.display())))?;
        let value: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| (2, format!("{}: {e}", file.display())))?;
        // a case file carries case_id; an exported store document does not
        let report = if value.get("case_id").is_some() {
            let case = CaseSubgraph::from_json_str(&text)
                .map_err(|e| (2, format!("{}: {e}", file.display())))?;
            ingest_case(graph, index, provider, &case, &mut judge, &fusion_config)
        } else {
            let imported = HkgGraph::from_json_str(&text)
                .map_err(|e| (2, format!("{}: {e}", file.display())))?;
            let case = CaseSubgraph {
                case_id: file.display().to_string(),
                nodes: imported.nodes().cloned().collect(),
                edges: imported.edges().cloned().collect(),
            };
            ingest_import(graph, index, provider, &case, &mut judge, &fusion_config)
        }
        .map_err(|e| (2, format!("{}: {e}", file.display())))?;
        reports.push((file.display().to_string(), report));
    }
    Ok(reports)
}

fn print_reports(reports: &[(String, FusionReport)], human: bool) {
    if human {
        for (file, report) in reports {
            println!(
                "{file}: {} inserted, {} merged, {} variants, {} edges deferred",
                report.inserted(),
                report.merged(),
                report.variants(),
                report.deferred_edges()
            );
        }
    } else {
        let value: Vec<_> = reports
            .iter()
            .map(|(file, r)| {
                json!({
                    "file": file,
                    "case_id": r.case_id,
                    "inserted": r.inserted(),
                    "merged": r.merged(),
                    "variants": r.variants(),
                    "edges_deferred": r.deferred_edges(),
                })
            })
            .collect();
        println!("{}", serde_json::to_string_pretty(&value).expect("json"));
    }
}

pub fn run(command: HkgCommand, config: &Config, human: bool) -> u8 {
    let provider = HashedEmbedding::new(config.embedding_dimension);
    match command {
        HkgCommand::Ingest { files, store } | HkgCommand::FuseReport { files, store }
            if files.is_empty() =>
        {
            let _ = (files, store);
            eprintln!("no case files given");
            2
        }
        HkgCommand::Ingest { files, store } => {
            let path = match store_path(&store, config) {
                Ok(p) => p,
                Err(e) => {
                    eprintln!("{e}");
                    return 2;
                }
            };
            let mut graph = match load_store(&path) {
                Ok(g) => g,
                Err(e) => {
                    eprintln!("store error: {e}");
                    return 1;
                }
            };
            let mut index = build_index(&graph, &provider);
            match ingest_files(&mut graph, &mut index, &provider, &files, config) {
                Ok(reports) => {
                    if let Err(e) = std::fs::write(&path, graph.to_json_string()) {
                        eprintln!("store error: {e}");
                        return 1;
                    }
                    print_reports(&reports, human);
                    0
                }
                Err((code, message)) => {
                    eprintln!("{message}");
                    code
                }
            }
        }
        HkgCommand::FuseReport { files, store } => {
            let path = match store_path(&store, config) {
                Ok(p) => p,
                Err(e) => {
                    eprintln!("{e}");
                    return 2;
                }
            };
            let mut graph = match load_store(&path) {
                Ok(g) => g,
                Err(e) => {
                    eprintln!("store error: {e}");
                    return 1;
                }
            };
            let mut index = build_index(&graph, &provider);
            // scratch copies only; the on-disk store stays untouched
            match ingest_files(&mut graph, &mut index, &provider, &files, config) {
                Ok(reports) => {
                    print_reports(&reports, human);
                    0
                }
                Err((code, message)) => {
                    eprintln!("{message}");
                    code
                }
            }
        }
        HkgCommand::Stats { store } => {
            let path = match store_path(&store, config) {
                Ok(p) => p,
                Err(e) => {
                    eprintln!("{e}");
                    return 2;
                }
            };
            let graph = match load_store(&path) {
                Ok(g) => g,
                Err(e) => {
                    eprintln!("store error: {e}");
                    return 1;
                }
            };
            let layer_counts: Vec<(String, usize)> = LayerTag::ALL
                .iter()
                .map(|layer| {
                    (
                        format!("{layer:?}"),
                        graph.nodes().filter(|n| n.layer == *layer).count(),
                    )
                })
                .collect();
            let edge_counts: Vec<(String, usize)> = EdgeKind::ALL
                .iter()
                .map(|kind| {
                    (
                        format!("{kind:?}"),
                        graph.edges().filter(|e| e.kind == *kind).count(),
                    )
                })
                .filter(|(_, n)| *n > 0)
                .collect();
            if human {
                println!("nodes: {}", graph.node_count());
                for (layer, count) in &layer_counts {
                    println!("  {layer}: {count}");
                }
                println!("edges: {}", graph.edge_count());
                for (kind, count) in &edge_counts {
                    println!("  {kind}: {count}");
                }
            } else {
                let value = json!({
                    "nodes": graph.node_count(),
                    "edges": graph.edge_count(),
                    "layers": layer_counts.into_iter().collect::<std::collections::BTreeMap<_,_>>(),
                    "edge_kinds": edge_counts.into_iter().collect::<std::collections::BTreeMap<_,_>>(),
                });
                println!("{}", serde_json::to_string_pretty(&value).expect("json"));
            }
            0
        }
        HkgCommand::Export { store, out } => {
            let path = match store_path(&store, config) {
                Ok(p) => p,
                Err(e) => {
                    eprintln!("{e}");
                    return 2;
                }
            };
            let graph = match load_store(&path) {
                Ok(g) => g,
                Err(e) => {
                    eprintln!("store error: {e}");
                    return 1;
                }
            };
            let text = graph.to_json_string();
            match out {
                Some(out_path) => {
                    if let Err(e) = std::fs::write(&out_path, text) {
                        eprintln!("write error: {e}");
                        return 1;
                    }
                }
                None => println!("{text}"),
            }
            0
        }
    }
}
