use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use rayon::prelude::*;
use serde_json::json;
use spectral_transfer::imaging::io::{read_envi, read_json, read_mask, read_png, write_envi_f32, write_mask, write_png};
use spectral_transfer::imaging::{
    preprocess, rasterize_annotations, AnnotationSet, ClassTaxonomy, DatasetManifest, FloatCube, LabelMask,
    SampleRecord, Split,
};
use spectral_transfer::matching::{FileMatcher, NccMatcher, PointMatcher};
use spectral_transfer::metrics::{evaluate_dataset, render_table, EvalReport, Evaluator, GroundTruth, TableRow};
use spectral_transfer::spectral::{false_color, pca_apply, pca_fit, sample_spectra, PcaModel, Projection};
use spectral_transfer::synth::{read_affines, write_dataset, MANIFEST_FILE};
use spectral_transfer::transfer::{manual_alignment, prepare_sample, transfer_mask, MatcherKind, TransferError};

use crate::config::RunConfig;
use crate::run::{create_dir, output_path, write_json_file, RunRecord, SampleOutcome, Summary};
use crate::{
    Cli, Command, EvaluateArgs, FormatArg, MatcherArg, ModeArg, PcaApplyArgs, PcaFitArgs, PreprocessArgs,
    ProjectionArg, ReportArgs, SplitArg, SynthArgs, TransferArgs,
};

/// What the process should report when a command finished.
pub enum Outcome {
    Done,
    /// Every sample failed or was skipped.
    NothingSucceeded,
}

impl Outcome {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            Outcome::Done => ExitCode::SUCCESS,
            Outcome::NothingSucceeded => ExitCode::FAILURE,
        }
    }

    fn from_summary(s: &Summary) -> Self {
        if s.all_failed() {
            Outcome::NothingSucceeded
        } else {
            Outcome::Done
        }
    }
}

pub fn dispatch(cli: &Cli) -> anyhow::Result<Outcome> {
    let cfg = RunConfig::load_or_default(cli.config.as_deref())?;
    match &cli.command {
        Command::Synth(a) => synth(a, cfg),
        Command::Preprocess(a) => preprocess_cmd(a, cfg),
        Command::PcaFit(a) => pca_fit_cmd(a, cfg),
        Command::PcaApply(a) => pca_apply_cmd(a, cfg),
        Command::Transfer(a) => transfer(a, cfg),
        Command::Evaluate(a) => evaluate(a),
        Command::Report(a) => report(a),
    }
}

fn split_of(s: SplitArg) -> Split {
    match s {
        SplitArg::Train => Split::Train,
        SplitArg::Val => Split::Val,
        SplitArg::Test => Split::Test,
    }
}

fn load_manifest(path: &Path) -> anyhow::Result<DatasetManifest> {
    DatasetManifest::load(path).with_context(|| format!("loading manifest {}", path.display()))
}

fn selected(m: &DatasetManifest, split: Option<SplitArg>) -> Vec<&SampleRecord> {
    let split = split.map(split_of);
    m.samples
        .iter()
        .filter(|s| split.is_none_or(|sp| s.split == sp))
        .collect()
}

fn path_str(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

fn float_cube(m: &DatasetManifest, s: &SampleRecord) -> anyhow::Result<FloatCube> {
    Ok(read_envi(&m.resolve(&s.cube))?.into_float(m.preprocess.cube_norm_divisor))
}

/// RGB-frame mask drawn from the sample's annotations.
fn rgb_mask(m: &DatasetManifest, s: &SampleRecord, rgb_size: (usize, usize)) -> anyhow::Result<LabelMask> {
    let ann: AnnotationSet = read_json(&m.resolve(&s.annotations))?;
    Ok(rasterize_annotations(
        &ann,
        &m.classes,
        rgb_size,
        (ann.image_width, ann.image_height),
    )?)
}

/// A sample that lacks the inputs a command needs; reported, not failed.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct Skip(String);

fn outcomes_of(samples: &[&SampleRecord], results: Vec<anyhow::Result<()>>) -> Vec<SampleOutcome> {
    samples
        .iter()
        .zip(results)
        .map(|(s, r)| match r {
            Ok(()) => SampleOutcome::ok(&s.id),
            Err(e) => match e.downcast_ref::<Skip>() {
                Some(skip) => SampleOutcome::skipped(&s.id, &skip.0),
                None => SampleOutcome::failed(&s.id, &e),
            },
        })
        .collect()
}

fn synth(a: &SynthArgs, mut cfg: RunConfig) -> anyhow::Result<Outcome> {
    if let Some(b) = a.bands {
        cfg.synth.bands = b;
    }
    if let Some(g) = a.projective {
        cfg.synth.projective = g;
    }
    if let Some(p) = a.ribbon_probability {
        cfg.synth.ribbon_probability = p;
    }
    let out = output_path(&a.out);
    create_dir(&out)?;
    let manifest = write_dataset(&out, &cfg.synth, a.scenes, a.seed)?;
    RunRecord {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command: "synth",
        inputs: json!({ "scenes": a.scenes, "seed": a.seed }),
        config: json!({ "version": cfg.version, "synth": cfg.synth }),
        artifacts: Vec::new(),
        summary: Some(Summary {
            total: a.scenes,
            ok: manifest.samples.len(),
            ..Summary::default()
        }),
        samples: Vec::new(),
    }
    .write(&out)?;
    eprintln!("wrote {} scenes to {}", manifest.samples.len(), out.join(MANIFEST_FILE).display());
    Ok(Outcome::Done)
}

fn preprocess_cmd(a: &PreprocessArgs, cfg: RunConfig) -> anyhow::Result<Outcome> {
    let m = load_manifest(&a.data.manifest)?;
    let out = output_path(&a.out);
    create_dir(&out)?;
    let samples = selected(&m, a.data.split);
    let results: Vec<anyhow::Result<()>> = samples
        .par_iter()
        .map(|s| -> anyhow::Result<()> {
            let rgb = read_png(&m.resolve(&s.rgb))?;
            let cube = float_cube(&m, s)?;
            let mask = rgb_mask(&m, s, rgb.size())?;
            // the float cube is already normalized
            let pcfg = spectral_transfer::imaging::PreprocessConfig {
                cube_norm_divisor: 1.0,
                ..m.preprocess.clone()
            };
            let p = preprocess(&rgb, &cube, Some(&mask), &pcfg)?;
            write_png(&out.join(format!("rgb/{}.png", s.id)), &p.rgb)?;
            write_envi_f32(&out.join(format!("cube/{}.hdr", s.id)), &p.cube)?;
            if let Some(mask) = &p.mask {
                write_mask(&out.join(format!("mask/{}.png", s.id)), mask)?;
            }
            Ok(())
        })
        .collect();
    finish_samples("preprocess", &out, &a.data.manifest, &samples, results, json!({ "preprocess": m.preprocess }), &cfg)
}

fn finish_samples(
    command: &str,
    out: &Path,
    manifest: &Path,
    samples: &[&SampleRecord],
    results: Vec<anyhow::Result<()>>,
    settings: serde_json::Value,
    cfg: &RunConfig,
) -> anyhow::Result<Outcome> {
    let outcomes = outcomes_of(samples, results);
    let summary = Summary::of(&outcomes);
    for o in outcomes.iter().filter(|o| o.error.is_some()) {
        eprintln!("{}", json!({ "sample": o.id, "status": o.status, "error": o.error }));
    }
    RunRecord {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command,
        inputs: json!({ "manifest": path_str(manifest) }),
        config: json!({ "version": cfg.version, "settings": settings }),
        artifacts: Vec::new(),
        summary: Some(summary.clone()),
        samples: outcomes,
    }
    .write(out)?;
    eprintln!("{command}: {} ok, {} skipped, {} failed", summary.ok, summary.skipped, summary.failed);
    Ok(Outcome::from_summary(&summary))
}

fn pca_fit_cmd(a: &PcaFitArgs, mut cfg: RunConfig) -> anyhow::Result<Outcome> {
    if let Some(k) = a.k {
        cfg.pca.k = k;
    }
    if let Some(n) = a.max_samples {
        cfg.pca.max_samples = n;
    }
    if let Some(s) = a.seed {
        cfg.pca.seed = s;
    }
    let m = load_manifest(&a.data.manifest)?;
    let out = output_path(&a.out);
    create_dir(&out)?;
    let samples = selected(&m, a.data.split);
    if samples.is_empty() {
        bail!("no samples selected");
    }
    let per_cube = cfg.pca.max_samples.div_ceil(samples.len()).max(1);
    let seed = cfg.pca.seed;
    let sampled: Vec<anyhow::Result<(Vec<f64>, usize)>> = samples
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            let cube = float_cube(&m, s)?;
            let bands = spectral_transfer::imaging::Cube::bands(&cube);
            Ok((sample_spectra(&cube, per_cube, seed.wrapping_add(i as u64)), bands))
        })
        .collect();
    let mut data = Vec::new();
    let mut bands = None;
    let mut results = Vec::new();
    for r in sampled {
        match r {
            Ok((d, b)) => {
                if *bands.get_or_insert(b) != b {
                    results.push(Err(anyhow::anyhow!("cube has {b} bands, expected {}", bands.unwrap_or(b))));
                    continue;
                }
                data.extend(d);
                results.push(Ok(()));
            }
            Err(e) => results.push(Err(e)),
        }
    }
    let Some(bands) = bands else {
        return finish_samples("pca-fit", &out, &a.data.manifest, &samples, results, json!(cfg.pca), &cfg);
    };
    let model = pca_fit(&data, bands, cfg.pca.k)?;
    model.save(&out.join("pca_model.json"))?;
    eprintln!(
        "explained variance: {:.4} over {} components",
        model.explained_variance_ratio.iter().sum::<f64>(),
        model.k
    );
    finish_samples("pca-fit", &out, &a.data.manifest, &samples, results, json!(cfg.pca), &cfg)
}

fn pca_apply_cmd(a: &PcaApplyArgs, cfg: RunConfig) -> anyhow::Result<Outcome> {
    let m = load_manifest(&a.data.manifest)?;
    let model = PcaModel::load(&a.model).with_context(|| format!("loading model {}", a.model.display()))?;
    let out = output_path(&a.out);
    create_dir(&out)?;
    let samples = selected(&m, a.data.split);
    let results: Vec<anyhow::Result<()>> = samples
        .par_iter()
        .map(|s| -> anyhow::Result<()> {
            let cube = float_cube(&m, s)?;
            let projected = pca_apply(&cube, &model)?;
            write_envi_f32(&out.join(format!("{}.hdr", s.id)), &projected)?;
            let bands = if model.k >= 3 { [0, 1, 2] } else { [0, 0, 0] };
            write_png(&out.join(format!("{}.png", s.id)), &false_color(&projected, bands)?)?;
            Ok(())
        })
        .collect();
    finish_samples(
        "pca-apply",
        &out,
        &a.data.manifest,
        &samples,
        results,
        json!({ "model": path_str(&a.model), "k": model.k }),
        &cfg,
    )
}

fn transfer(a: &TransferArgs, mut cfg: RunConfig) -> anyhow::Result<Outcome> {
    if let Some(mk) = a.matcher {
        cfg.transfer.matcher = match mk {
            MatcherArg::Ncc => MatcherKind::Ncc,
            MatcherArg::File => MatcherKind::File,
            MatcherArg::Oracle => MatcherKind::Oracle,
        };
    }
    if let Some(p) = a.projection {
        cfg.projection = match p {
            ProjectionArg::Mean => Projection::Mean,
            ProjectionArg::FirstComponent => Projection::FirstComponent,
        };
    }
    cfg.transfer.validate()?;
    if a.mode == ModeArg::Lt && cfg.transfer.matcher == MatcherKind::File && a.matches.is_none() {
        bail!("the file matcher needs --matches");
    }
    let model = match (&a.model, cfg.projection) {
        (Some(p), _) => Some(PcaModel::load(p).with_context(|| format!("loading model {}", p.display()))?),
        (None, Projection::FirstComponent) => bail!("first-component projection needs --model"),
        (None, Projection::Mean) => None,
    };
    let m = load_manifest(&a.data.manifest)?;
    let out = output_path(&a.out);
    create_dir(&out)?;
    let samples = selected(&m, a.data.split);
    let results: Vec<anyhow::Result<()>> = samples
        .par_iter()
        .map(|s| transfer_sample(a, &cfg, model.as_ref(), &m, s, &out))
        .collect();
    let settings = json!({
        "mode": match a.mode { ModeArg::Lt => "lt", ModeArg::Ma => "ma" },
        "transfer": cfg.transfer,
        "projection": cfg.projection,
        "matches": a.matches.as_deref().map(path_str),
        "model": a.model.as_deref().map(path_str),
    });
    finish_samples("transfer", &out, &a.data.manifest, &samples, results, settings, &cfg)
}

fn transfer_sample(
    a: &TransferArgs,
    cfg: &RunConfig,
    model: Option<&PcaModel>,
    m: &DatasetManifest,
    s: &SampleRecord,
    out: &Path,
) -> anyhow::Result<()> {
    let rgb = read_png(&m.resolve(&s.rgb))?;
    let mask = rgb_mask(m, s, rgb.size())?;
    let cube = read_envi(&m.resolve(&s.cube))?;
    let mask_path = out.join(format!("{}.png", s.id));
    if a.mode == ModeArg::Ma {
        let aligned = manual_alignment(&mask, m.preprocess.rgb_crop, cube.size())?;
        write_mask(&mask_path, &aligned)?;
        return Ok(());
    }
    let cube = cube.into_float(m.preprocess.cube_norm_divisor);
    let views = prepare_sample(&rgb, &mask, &cube, m.preprocess.rgb_crop, cfg.projection, model)?;
    let matcher: Box<dyn PointMatcher> = match cfg.transfer.matcher {
        MatcherKind::Ncc => Box::new(NccMatcher::new(cfg.transfer.matcher_config.clone())),
        MatcherKind::File => {
            let path = a.matches.as_ref().context("the file matcher needs --matches")?;
            let mut fm = FileMatcher::load(path, &s.id)?;
            fm.snap_radius = cfg.transfer.snap_radius;
            Box::new(fm)
        }
        MatcherKind::Oracle => {
            let Some(p) = s.affines.as_ref() else {
                return Err(Skip("no per-instance affines for the oracle matcher".into()).into());
            };
            Box::new(views.oracle(&read_affines(&m.resolve(p))?))
        }
    };
    let report_path = out.join(format!("{}.json", s.id));
    match transfer_mask(&views.source, &views.target, &views.mask, &cfg.transfer, matcher.as_ref()) {
        Ok(res) => {
            write_mask(&mask_path, &res.mask)?;
            write_json_file(&report_path, &res.report)
        }
        Err(TransferError::TransferFailed { source, report }) => {
            write_json_file(&report_path, &report)?;
            Err(anyhow::Error::new(source).context("matcher failed"))
        }
        Err(e) => Err(e.into()),
    }
}

fn pred_ids(dir: &Path) -> anyhow::Result<Vec<(String, PathBuf)>> {
    let mut v = Vec::new();
    for entry in std::fs::read_dir(dir).with_context(|| format!("listing {}", dir.display()))? {
        let p = entry?.path();
        let is_png = p.extension().is_some_and(|e| e == "png");
        let stem = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        if is_png && !stem.contains('.') {
            v.push((stem, p));
        }
    }
    v.sort();
    Ok(v)
}

fn evaluate_dirs(pred: &Path, gt: &Path, method: &str) -> anyhow::Result<EvalReport> {
    let taxonomy = ClassTaxonomy::default();
    let ids = pred_ids(gt)?;
    let classes = taxonomy.ids();
    let counts: Vec<anyhow::Result<Option<_>>> = ids
        .par_iter()
        .map(|(id, gt_path)| {
            let p = pred.join(format!("{id}.png"));
            if !p.is_file() {
                return Ok(None);
            }
            let pm = read_mask(&p)?;
            let gm = read_mask(gt_path)?;
            Ok(Some(spectral_transfer::metrics::class_counts(&pm, &gm, &classes)?))
        })
        .collect();
    let mut ev = Evaluator::new(taxonomy);
    for ((id, _), c) in ids.iter().zip(counts) {
        match c? {
            Some(c) => ev.add_counts(id, c),
            None => ev.skip(id),
        }
    }
    Ok(ev.finish(method))
}

fn evaluate(a: &EvaluateArgs) -> anyhow::Result<Outcome> {
    let report = match &a.manifest {
        Some(mp) => {
            let m = load_manifest(mp)?;
            let gt = match &a.gt {
                Some(d) => GroundTruth::Directory(d.clone()),
                None => GroundTruth::ManifestHsiMask,
            };
            evaluate_dataset(&m, a.split.map(split_of), &a.pred, &gt, &a.method)?
        }
        None => evaluate_dirs(&a.pred, a.gt.as_deref().expect("required without manifest"), &a.method)?,
    };
    let taxonomy = ClassTaxonomy::default();
    let table = render_table(&[TableRow::from(&report)], &taxonomy);
    match a.format {
        FormatArg::Table => print!("{table}"),
        FormatArg::Json => println!("{}", serde_json::to_string_pretty(&report)?),
    }
    if !report.skipped.is_empty() {
        eprintln!("skipped {} samples without prediction or ground truth", report.skipped.len());
    }
    if let Some(o) = &a.out {
        let out = output_path(o);
        create_dir(&out)?;
        write_json_file(&out.join("eval.json"), &report)?;
        std::fs::write(out.join("table.txt"), &table).context("writing table.txt")?;
        RunRecord {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: "evaluate",
            inputs: json!({
                "pred": path_str(&a.pred),
                "gt": a.gt.as_deref().map(path_str),
                "manifest": a.manifest.as_deref().map(path_str),
            }),
            config: json!({ "method": a.method }),
            artifacts: Vec::new(),
            summary: Some(Summary {
                total: report.evaluated + report.skipped.len(),
                ok: report.evaluated,
                skipped: report.skipped.len(),
                failed: 0,
            }),
            samples: Vec::new(),
        }
        .write(&out)?;
    }
    Ok(if report.evaluated == 0 {
        Outcome::NothingSucceeded
    } else {
        Outcome::Done
    })
}

fn report(a: &ReportArgs) -> anyhow::Result<Outcome> {
    let reports: Vec<EvalReport> = a
        .evals
        .iter()
        .map(|p| read_json(p).with_context(|| format!("loading {}", p.display())))
        .collect::<anyhow::Result<_>>()?;
    let rows: Vec<TableRow> = reports.iter().map(TableRow::from).collect();
    let table = render_table(&rows, &ClassTaxonomy::default());
    match a.format {
        FormatArg::Table => print!("{table}"),
        FormatArg::Json => println!("{}", serde_json::to_string_pretty(&rows)?),
    }
    if let Some(o) = &a.out {
        let out = output_path(o);
        create_dir(&out)?;
        write_json_file(&out.join("rows.json"), &rows)?;
        std::fs::write(out.join("table.txt"), &table).context("writing table.txt")?;
        RunRecord {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: "report",
            inputs: json!({ "evals": a.evals.iter().map(|p| path_str(p)).collect::<Vec<_>>() }),
            config: json!({}),
            artifacts: Vec::new(),
            summary: None,
            samples: Vec::new(),
        }
        .write(&out)?;
    }
    Ok(Outcome::Done)
}
