//! `simulate`: synthetic corpus archive plus a ground-truth sidecar.

use log::info;

use homevenue::simulate::{generate_synthetic_corpus, PopulationSpec};

use crate::manifest::ManifestBuilder;
use crate::{archive, write_json, CliError, Outcome, SimulateArgs};

pub const GROUND_TRUTH: &str = "ground_truth.json";

pub fn run(args: &SimulateArgs) -> Result<Outcome, CliError> {
    let text = std::fs::read_to_string(&args.spec).map_err(|e| CliError::input(&args.spec, e))?;
    let mut spec = PopulationSpec::from_json(&text).map_err(|e| CliError::input(&args.spec, e))?;
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    let synthetic = generate_synthetic_corpus(&spec).map_err(|e| CliError::input(&args.spec, e))?;
    let config = serde_json::to_value(&spec).expect("spec serializes");
    let manifest = ManifestBuilder::new(
        "simulate",
        config,
        std::slice::from_ref(&args.spec),
        vec![spec.seed],
    )?;

    let no_skips: [(); 0] = [];
    archive::write(&args.out, &synthetic.corpus, &no_skips)?;
    write_json(&args.out.join(GROUND_TRUTH), &synthetic.ground_truth)?;
    let mut outputs = archive::FILES.to_vec();
    outputs.push(GROUND_TRUTH);
    manifest.finish(&args.out, &outputs)?;
    info!(
        "{} synthetic scholars, seed {}",
        synthetic.corpus.n_scholars(),
        spec.seed
    );
    Ok(Outcome::Success)
}
