use std::path::Path;
use std::time::Instant;

use dalr::compression::{compensate_with_vector, dalr_compress_gram, matched_keep, GramStats, PruneScore};
use dalr::io::{load_network, read_matrix, save_network, write_labels, write_matrix, CompressionReport};
use dalr::{
    parameter_fraction, prune_by_activation, svd_truncate, Activations, Batch, DenseMatrix, Factors, Layer, Matrix, Net,
};

use crate::util::{for_each_block, labeled_batch, ridge, usage, write_text, CliResult};
use crate::{CompressArgs, MethodArg};

/// How the compressed layer's outputs differ from the original's on a batch.
enum Replacement<'a> {
    Pair(&'a Factors),
    /// Only these output units survive; the rest read as zero.
    Kept(&'a [usize]),
}

impl Replacement<'_> {
    fn squared_error(&self, layer: &Layer, x: &Matrix) -> dalr::Result<f64> {
        let y = layer.apply(x)?;
        match self {
            Replacement::Pair(p) => Ok(y.sub(&p.apply(x)?)?.frobenius_norm_sq()),
            Replacement::Kept(kept) => Ok((0..y.rows())
                .filter(|i| kept.binary_search(i).is_err())
                .map(|i| y.row(i).iter().map(|v| v * v).sum::<f64>())
                .sum()),
        }
    }
}

struct Epsilon {
    value: f64,
    batch: &'static str,
}

fn epsilon(
    args: &CompressArgs,
    net: &Net,
    layer: &Layer,
    rep: &Replacement,
    eval_x: Option<&Matrix>,
) -> CliResult<Epsilon> {
    if let Some(inputs) = eval_x {
        let acts = net.extract_activations(inputs, args.layer)?;
        return Ok(Epsilon {
            value: rep.squared_error(layer, acts.x())?.sqrt(),
            batch: "eval-inputs",
        });
    }
    if let Some(path) = &args.acts {
        let mut sq = 0.0;
        for_each_block(path, args.block, |b| {
            sq += rep.squared_error(layer, b)?;
            Ok(())
        })?;
        return Ok(Epsilon {
            value: sq.sqrt(),
            batch: "acts",
        });
    }
    // no batch at all: the weight error, i.e. the output error for X = I
    let value = match rep {
        Replacement::Pair(p) => layer.weights().sub(&p.product())?.frobenius_norm(),
        Replacement::Kept(_) => unreachable!("pruning requires --acts"),
    };
    Ok(Epsilon {
        value,
        batch: "weights",
    })
}

fn gram_stats(path: &Path, dims: usize, block: usize) -> CliResult<GramStats<f64>> {
    let mut stats = GramStats::new(dims);
    for_each_block(path, block, |b| stats.accumulate(b))?;
    Ok(stats)
}

pub fn run(args: &CompressArgs) -> CliResult {
    let start = Instant::now();
    let net: Net = load_network(&args.net)?;
    let layer = net.layer(args.layer)?.clone();
    let (m, n) = layer.weights().shape();
    let k = args.rank;
    if args.method != MethodArg::Svd && args.acts.is_none() {
        return usage(format!("--acts is required for method {}", args.method.name()));
    }
    if args.lambda.is_some() && args.method != MethodArg::Dalr {
        return usage("--lambda only applies to method dalr");
    }
    let eval_x: Option<Matrix> = args.eval_inputs.as_deref().map(read_matrix).transpose()?;
    let eval: Option<Batch> = match (&args.eval_inputs, &args.eval_labels) {
        (Some(x), Some(l)) => Some(labeled_batch(x, l)?),
        _ => None,
    };

    std::fs::create_dir_all(&args.out).map_err(|e| dalr::Error::io(&args.out, e))?;
    let (compressed, report_k, lambda, fraction, eps) = match args.method {
        MethodArg::Svd | MethodArg::SvdBc | MethodArg::Dalr => {
            if (m + n) * k >= m * n {
                eprintln!(
                    "warning: rank {k} stores {} weights, not fewer than the {} of the original layer",
                    (m + n) * k,
                    m * n
                );
            }
            let pair = match (args.method, &args.acts) {
                (MethodArg::Svd, _) => svd_truncate(&layer, k)?,
                (MethodArg::SvdBc, Some(acts)) => {
                    let stats = gram_stats(acts, n, args.block)?;
                    compensate_with_vector(&layer, &svd_truncate(&layer, k)?, &stats.mean()?)?
                }
                (_, Some(acts)) => {
                    let stats = gram_stats(acts, n, args.block)?;
                    dalr_compress_gram(&layer, &stats, k, ridge(args.lambda)?)?
                }
                _ => unreachable!("checked above"),
            };
            let out = &args.out;
            write_matrix(out.join("pair.a.dmat"), &pair.a)?;
            write_matrix(out.join("pair.b.dmat"), &pair.b)?;
            write_matrix(out.join("pair.bias.dmat"), &DenseMatrix::row_vector(&pair.new_bias))?;
            let eps = epsilon(args, &net, &layer, &Replacement::Pair(&pair), eval_x.as_ref())?;
            (
                net.splice(args.layer, &pair)?,
                k,
                pair.lambda,
                parameter_fraction(m, n, k)?,
                eps,
            )
        }
        MethodArg::PruneMean | MethodArg::PruneMax => {
            let score = if args.method == MethodArg::PruneMean {
                PruneScore::Mean
            } else {
                PruneScore::Max
            };
            let path = args.acts.as_ref().expect("checked above");
            // scoring needs every sample's response, so this path reads the batch whole
            let acts = Activations::new(read_matrix(path)?)?;
            let keep = matched_keep(m, n, k);
            let pruned = prune_by_activation(&layer, &acts, keep, score)?;
            let compressed = net.prune_units(args.layer, &pruned.kept)?;
            write_labels(args.out.join("kept.txt"), &pruned.kept)?;
            let eps = epsilon(args, &net, &layer, &Replacement::Kept(&pruned.kept), eval_x.as_ref())?;
            (compressed, keep, 0.0, keep as f64 / m as f64, eps)
        }
    };

    let manifest = save_network(&compressed, &args.out, "manifest.json")?;
    // the written manifest must load back into a valid network
    let _: Net = load_network(&manifest)?;

    let (accuracy_before, accuracy_after) = match &eval {
        Some(b) => (Some(net.accuracy(b)?), Some(compressed.accuracy(b)?)),
        None => (None, None),
    };
    let report = CompressionReport {
        method: args.method.name().to_string(),
        layer: args.layer,
        k: report_k,
        lambda,
        parameter_fraction: fraction,
        epsilon: eps.value,
        epsilon_batch: eps.batch.to_string(),
        accuracy_before,
        accuracy_after,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    };
    let json = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    write_text(&args.out.join("report.json"), &json)?;
    println!(
        "{} layer {} k={} fraction {:.4} epsilon {} -> {}",
        report.method,
        report.layer,
        report.k,
        report.parameter_fraction,
        report.epsilon,
        manifest.display()
    );
    Ok(())
}
