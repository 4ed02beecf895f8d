use std::fmt::Write as _;

use dalr::io::{load_network, read_matrix, save_network};
use dalr::search::{JointCompressor, StopReason, StopRule};
use dalr::{joint_rank_search, Activations, Method, Net, SearchConfig};

use crate::util::{labeled_batch, ridge, usage, write_text, CliResult};
use crate::{MethodArg, SearchArgs, StopRuleArg};

fn parse_ranks(text: &str) -> CliResult<Vec<usize>> {
    text.split(',')
        .map(|t| t.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .or_else(|_| usage(format!("bad rank list {text:?}; expected e.g. 512,256,128")))
}

/// `A` applies to both layers; `A/B` gives each its own.
fn parse_schedule(text: &str) -> CliResult<(Vec<usize>, Vec<usize>)> {
    match text.split_once('/') {
        Some((a, b)) => Ok((parse_ranks(a)?, parse_ranks(b)?)),
        None => {
            let s = parse_ranks(text)?;
            Ok((s.clone(), s))
        }
    }
}

pub fn run(args: &SearchArgs) -> CliResult {
    let &[la, lb] = args.layers.as_slice() else {
        return usage("--layers takes exactly two indices, e.g. 0,1");
    };
    let method = match args.method {
        MethodArg::Svd => Method::Svd,
        MethodArg::SvdBc => Method::SvdBc,
        MethodArg::Dalr => Method::Dalr,
        other => return usage(format!("method {} cannot be searched over ranks", other.name())),
    };
    let (schedule_a, schedule_b) = parse_schedule(&args.schedule)?;
    let net: Net = load_network(&args.net)?;
    let val = labeled_batch(&args.val_inputs, &args.val_labels)?;
    let acts_a = Activations::new(read_matrix(args.acts_dir.join(format!("layer{la}.dmat")))?)?;
    let acts_b = Activations::new(read_matrix(args.acts_dir.join(format!("layer{lb}.dmat")))?)?;

    let mut cfg = SearchConfig::new(schedule_a, schedule_b);
    cfg.max_drop = args.max_drop;
    cfg.method = method;
    cfg.ridge = ridge(args.lambda)?;
    cfg.stop_rule = match args.stop_rule {
        StopRuleArg::Baseline => StopRule::Baseline,
        StopRuleArg::Previous => StopRule::Previous,
    };
    cfg.reextract_from = args.reextract_inputs.as_deref().map(read_matrix::<f64>).transpose()?;
    let trace = joint_rank_search(&net, la, lb, &val, (&acts_a, &acts_b), &cfg)?;

    let mut jsonl = String::new();
    for step in &trace.steps {
        jsonl += &serde_json::to_string(step).expect("step serializes");
        jsonl.push('\n');
    }
    write_text(&args.out.join("trace.jsonl"), &jsonl)?;

    let reason = match trace.stop_reason {
        StopReason::DropExceeded => "drop-exceeded",
        StopReason::Exhausted => "exhausted",
    };
    let mut csv = String::from(
        "layer_a,layer_b,baseline_accuracy,final_rank_a,final_rank_b,final_accuracy,fraction_a,fraction_b,fraction_total,steps,stop_reason\n",
    );
    writeln!(
        csv,
        "{},{},{},{},{},{},{},{},{},{},{}",
        trace.layer_a,
        trace.layer_b,
        trace.baseline_accuracy,
        trace.final_rank_a,
        trace.final_rank_b,
        trace.final_accuracy,
        trace.fraction_a,
        trace.fraction_b,
        trace.fraction_total,
        trace.steps_taken(),
        reason
    )
    .expect("writing to a string");
    write_text(&args.out.join("summary.csv"), &csv)?;

    let jc = JointCompressor::new(&net, la, lb, (&acts_a, &acts_b), &cfg)?;
    let final_net = jc.network_at(trace.final_rank_a, trace.final_rank_b)?;
    let manifest = save_network(&final_net, &args.out, "manifest.json")?;

    println!(
        "ranks ({}, {}) accuracy {} (baseline {}), {} steps, stopped: {reason} -> {}",
        trace.final_rank_a,
        trace.final_rank_b,
        trace.final_accuracy,
        trace.baseline_accuracy,
        trace.steps_taken(),
        manifest.display()
    );
    Ok(())
}
