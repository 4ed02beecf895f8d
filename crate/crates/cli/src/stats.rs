use std::path::Path;

use dalr::stats::profile_from_counts;
use dalr::{compare_profiles, Profile};

use crate::util::{for_each_block, write_text, CliResult};
use crate::StatsArgs;

/// Counts entries above the threshold per row, one block at a time.
fn profile(path: &Path, threshold: f64, block: usize) -> CliResult<Profile> {
    let mut counts: Vec<usize> = Vec::new();
    let (rows, cols) = for_each_block(path, block, |b| {
        counts.resize(b.rows(), 0);
        for (i, c) in counts.iter_mut().enumerate() {
            *c += b.row(i).iter().filter(|&&v| v > threshold).count();
        }
        Ok(())
    })?;
    counts.resize(rows, 0);
    Ok(profile_from_counts(&counts, cols)?)
}

fn csv(write: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> String {
    let mut buf = Vec::new();
    write(&mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv is ascii")
}

pub fn run(args: &StatsArgs) -> CliResult {
    let source = profile(&args.acts, args.threshold, args.block)?;
    write_text(&args.out, &csv(|b| source.write_csv(b)))?;
    let top = (source.half_mass_fraction * source.dims() as f64).round() as usize;
    println!(
        "half-mass fraction {} ({top} of {} neurons carry half the activations)",
        source.half_mass_fraction,
        source.dims()
    );
    if let Some(other) = &args.compare {
        let target = profile(other, args.threshold, args.block)?;
        let report = compare_profiles(&source, &target)?;
        println!("compare half-mass fraction {}", report.target_half_mass);
        println!("concentration ratio {}", report.ratio);
        if let Some(path) = &args.skew_out {
            write_text(path, &csv(|b| report.write_csv(b)))?;
        }
    }
    Ok(())
}
