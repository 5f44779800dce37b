//! Evaluates the semantic pipeline against direct transmission on synthetic
//! scenes and writes the CSV table to standard output.

use semtx::channel::DEFAULT_MU;
use semtx::features::FeatureParams;
use semtx::pipeline::{eval_sweep, synthetic_eval_set, write_csv, Knobs};

fn main() -> semtx::Result<()> {
    let (scenes, lib) = synthetic_eval_set(3, FeatureParams::default())?;
    let snrs = [1.0, 7.0, 13.0, 19.0];
    let seeds = [0, 1, 2];
    let rows = eval_sweep(&scenes, &lib, &snrs, &seeds, DEFAULT_MU, &Knobs::default(), 0)?;
    write_csv(&rows, std::io::stdout().lock())
}
