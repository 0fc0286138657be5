//! `evopoc validate` — the two validation stages on a user-supplied plan.

use std::path::PathBuf;

use clap::Args;
use evopoc::config::Config;
use evopoc::frontend::parse_dir;
use evopoc::pipeline::{ExecutionEnv, ExploitPlan};
use evopoc::profitability::simulate;
use evopoc::reachability::{check_path_reachability, Reachability};
use serde_json::json;

#[derive(Args)]
pub struct ValidateArgs {
    /// Plan file (JSON, including the per-step asset-op projection).
    pub plan: PathBuf,
    #[arg(long)]
    pub env: PathBuf,
    #[arg(long)]
    pub project: PathBuf,
}

pub fn run(args: ValidateArgs, config: &Config, human: bool) -> u8 {
    let plan = match std::fs::read_to_string(&args.plan)
        .map_err(|e| e.to_string())
        .and_then(|t| ExploitPlan::from_json_str(&t).map_err(|e| e.to_string()))
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!("{}: {e}", args.plan.display());
            return 2;
        }
    };
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
    let model = match parse_dir(&args.project) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("{}: {e}", args.project.display());
            return 2;
        }
    };

    // stage 1: logical reachability
    let reach = match check_path_reachability(
        &plan.steps,
        &env,
        &model,
        &config.traverse_config(),
        &config.solver_config(),
    ) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("reachability: {e}");
            return 2;
        }
    };
    let step_reports: Vec<serde_json::Value> = match &reach {
        Reachability::Reachable { steps } => steps
            .iter()
            .map(|s| {
                json!({
                    "step": s.step,
                    "verdict": if s.unknown_reason.is_some() { "unknown (treated reachable)" } else { "sat" },
                    "path": s.hops,
                    "predicates": s.predicates,
                    "model": s.model.iter().map(|(k, v)| (k.clone(), v.to_string())).collect::<std::collections::BTreeMap<_,_>>(),
                })
            })
            .collect(),
        Reachability::Unreachable { step, witness } => vec![json!({
            "step": step,
            "verdict": "unsat",
            "witness": witness,
        })],
    };

    if let Reachability::Unreachable { step, witness } = &reach {
        let report = json!({
            "stage1": "fail",
            "failed_step": step,
            "witness": witness,
            "steps": step_reports,
        });
        emit(&report, human);
        return 4;
    }

    // stage 2: economic profitability over the plan's projection
    let script = plan.projection();
    let initial = env.initial_state();
    match simulate(&script, &initial, &env.attacker, &env.numeraire, &config.sim_config()) {
        Ok(outcome) => {
            let report = json!({
                "stage1": "pass",
                "stage2": if outcome.profitable { "pass" } else { "fail" },
                "delta_w": format!("{}/{}", outcome.delta_w_num, outcome.delta_w_den),
                "profitable": outcome.profitable,
                "steps": step_reports,
            });
            emit(&report, human);
            if outcome.profitable {
                0
            } else {
                3
            }
        }
        Err(e) => {
            let report = json!({
                "stage1": "pass",
                "stage2": "fail",
                "error": e.to_string(),
                "steps": step_reports,
            });
            emit(&report, human);
            3
        }
    }
}

fn emit(report: &serde_json::Value, human: bool) {
    if human {
        println!("stage 1: {}", report["stage1"].as_str().unwrap_or("?"));
        if let Some(s2) = report.get("stage2") {
            println!("stage 2: {}", s2.as_str().unwrap_or("?"));
        }
        if let Some(dw) = report.get("delta_w") {
            println!("ΔW = {}", dw.as_str().unwrap_or("?"));
        }
        if let Some(witness) = report.get("witness") {
            println!("witness: {}", witness.as_str().unwrap_or("?"));
        }
    } else {
        println!("{}", serde_json::to_string_pretty(report).expect("json"));
    }
}
