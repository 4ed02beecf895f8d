use serde::Serialize;

use dalr::io::{load_network, read_labels, read_matrix, write_matrix};
use dalr::{reconstruction_error, Batch, Matrix, Net};

use crate::util::{write_text, CliResult};
use crate::{EvaluateArgs, ExtractArgs};

#[derive(Serialize)]
struct Evaluation {
    samples: usize,
    parameters: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    accuracy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reference_parameters: Option<usize>,
    /// `||Y_ref - Y||_F` over the network outputs.
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    relative_epsilon: Option<f64>,
}

pub fn run(args: &EvaluateArgs) -> CliResult {
    let net: Net = load_network(&args.net)?;
    let x: Matrix = read_matrix(&args.inputs)?;
    let y = net.forward(&x)?;
    let accuracy = match &args.labels {
        Some(path) => Some(net.accuracy(&Batch::new(x.clone(), read_labels(path)?)?)?),
        None => None,
    };
    let mut eval = Evaluation {
        samples: x.cols(),
        parameters: net.parameter_count(),
        accuracy,
        reference_parameters: None,
        epsilon: None,
        relative_epsilon: None,
    };
    if let Some(path) = &args.reference {
        let reference: Net = load_network(path)?;
        let y_ref = reference.forward(&x)?;
        let eps = reconstruction_error(&y_ref, &y)?;
        eval.reference_parameters = Some(reference.parameter_count());
        eval.epsilon = Some(eps);
        let scale = y_ref.frobenius_norm();
        eval.relative_epsilon = (scale > 0.0).then(|| eps / scale);
    }
    let json = serde_json::to_string_pretty(&eval).expect("evaluation serializes") + "\n";
    write_text(&args.out, &json)?;
    print!("{json}");
    Ok(())
}

pub fn extract(args: &ExtractArgs) -> CliResult {
    let net: Net = load_network(&args.net)?;
    let x: Matrix = read_matrix(&args.inputs)?;
    let acts = net.extract_activations(&x, args.layer)?;
    write_matrix(&args.out, acts.x())?;
    println!("layer {} input batch: {}x{}", args.layer, acts.dims(), acts.samples());
    Ok(())
}
