use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use gaitnet::data::{synthesize_dataset, Corpus, DatasetManifest, GeneratorSpec};
use gaitnet::model::save_checkpoint;
use gaitnet::train::{run_loo, run_random_split, EvalReport};
use log::info;

use crate::settings::{Resolved, RunConfig};
use crate::summary::{render_text, summarize};

const REPORT: &str = "report.json";
const CHECKPOINT: &str = "model.ckpt";
const RUN_MANIFEST: &str = "run.toml";

pub fn synth(file: RunConfig, spec_path: Option<&Path>, seed: Option<u64>, out: &Path) -> Result<()> {
    let spec = match spec_path {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading spec {}", path.display()))?;
            toml::from_str::<GeneratorSpec>(&text).with_context(|| format!("parsing spec {}", path.display()))?
        }
        None => file.generator.clone().unwrap_or_default(),
    };
    let seed = seed.or(file.seed).unwrap_or(0);
    let data = synthesize_dataset(&spec, seed)?;
    let manifest = data.write_to(out).with_context(|| format!("writing cohort to {}", out.display()))?;
    let run = RunConfig {
        tool_version: Some(env!("CARGO_PKG_VERSION").to_string()),
        command: Some("synth".into()),
        artifacts: Some(vec!["manifest.csv".into(), "recordings".into()]),
        seed: Some(seed),
        generator: Some(spec),
        ..RunConfig::default()
    };
    run.save(&out.join(RUN_MANIFEST))?;
    println!("{}", manifest.display());
    Ok(())
}

fn prepare(cfg: &RunConfig, out: &Path) -> Result<(Resolved, Corpus)> {
    let resolved = Resolved::from_config(cfg)?;
    let manifest_path = resolved.manifest.clone().ok_or_else(|| anyhow!("--manifest is required"))?;
    let manifest = DatasetManifest::load(&manifest_path)?;
    let corpus = Corpus::load(&manifest, resolved.preprocess)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    Ok((resolved, corpus))
}

pub fn train(cfg: RunConfig, out: &Path) -> Result<()> {
    let (resolved, corpus) = prepare(&cfg, out)?;
    let outcome = run_random_split(&corpus, &resolved.experiment)?;
    save_checkpoint(&outcome.params, &out.join(CHECKPOINT))?;
    outcome.report.save(&out.join(REPORT))?;
    resolved.to_run_config("train", vec![CHECKPOINT.into(), REPORT.into()]).save(&out.join(RUN_MANIFEST))?;
    info!("accuracy {:.4}, F1 {:.4}", outcome.report.accuracy, outcome.report.f1);
    println!("{}", out.join(REPORT).display());
    Ok(())
}

pub fn loo(cfg: RunConfig, out: &Path) -> Result<()> {
    let (resolved, corpus) = prepare(&cfg, out)?;
    let report = run_loo(&corpus, &resolved.experiment)?;
    report.save(&out.join(REPORT))?;
    resolved.to_run_config("loo", vec![REPORT.into()]).save(&out.join(RUN_MANIFEST))?;
    info!("mean accuracy {:.4}, mean F1 {:.4} over {} folds", report.accuracy, report.f1, report.folds.len());
    println!("{}", out.join(REPORT).display());
    Ok(())
}

pub fn report(paths: &[PathBuf], out: &Path) -> Result<()> {
    let reports = paths
        .iter()
        .map(|p| Ok((p.display().to_string(), EvalReport::load(p)?)))
        .collect::<Result<Vec<_>>>()?;
    let summary = summarize(&reports);
    let text = render_text(&summary);
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    fs::write(out.join("summary.txt"), &text)?;
    let mut json = serde_json::to_string_pretty(&summary)?;
    json.push('\n');
    fs::write(out.join("summary.json"), json)?;
    print!("{text}");
    Ok(())
}
