use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use mefuse::hdrio::{load_ldr, load_rgbe, save_ldr, synth_exposures};
use mefuse::metrics::{
    discrete_entropy, statistical_naturalness, write_reports_csv, MetricsReport,
};
use mefuse::{pipeline, ExposureStack, PipelineConfig, RgbImage};
use rayon::prelude::*;

const LDR_EXTENSIONS: &[&str] = &["png", "ppm"];

/// Loads LDR files into a stack ordered from darkest to brightest.
pub fn load_stack(paths: &[PathBuf]) -> Result<ExposureStack> {
    if paths.is_empty() {
        bail!("no input images");
    }
    let mut images = paths
        .iter()
        .map(|p| load_ldr(p).with_context(|| format!("loading {}", p.display())))
        .collect::<Result<Vec<_>>>()?;
    // stable, so equal brightness keeps the given order
    images.sort_by(|a, b| a.mean_luminance().total_cmp(&b.mean_luminance()));
    Ok(ExposureStack::new(images)?)
}

pub fn fuse(
    inputs: &[PathBuf],
    output: &Path,
    cfg: &PipelineConfig,
    skip_enhance: bool,
) -> Result<()> {
    let stack = load_stack(inputs)?;
    let fused = if skip_enhance {
        pipeline::run_baseline(&stack, cfg)?
    } else {
        pipeline::run(&stack, cfg)?
    };
    save_ldr(output, &fused).with_context(|| format!("writing {}", output.display()))?;
    Ok(())
}

/// Where simulation results go.
pub struct SimOutput {
    pub out_dir: PathBuf,
    pub report: Option<PathBuf>,
    pub scores: Option<PathBuf>,
    pub dump_stacks: bool,
}

/// Everything produced for one scene.
struct SceneResult {
    id: String,
    /// Middle exposure of the input stack, scored as the "input" column.
    input: RgbImage,
    original: RgbImage,
    proposed: RgbImage,
}

#[derive(Clone, Copy)]
struct Scores {
    entropy: f64,
    naturalness: f64,
}

fn score(img: &RgbImage) -> Result<Scores> {
    Ok(Scores {
        entropy: discrete_entropy(img),
        naturalness: statistical_naturalness(img)?,
    })
}

fn process(id: String, stack: &ExposureStack, cfg: &PipelineConfig) -> Result<SceneResult> {
    let original = pipeline::run_baseline(stack, cfg)?;
    let proposed = pipeline::run(stack, cfg)?;
    let input = stack.images()[(stack.len() - 1) / 2].clone();
    Ok(SceneResult {
        id,
        input,
        original,
        proposed,
    })
}

fn ev_label(ev: f64) -> String {
    if ev > 0.0 {
        format!("+{ev}")
    } else {
        format!("{ev}")
    }
}

pub fn simulate1(
    inputs: &[PathBuf],
    evs: &[f64],
    cfg: &PipelineConfig,
    out: &SimOutput,
) -> Result<()> {
    if inputs.is_empty() {
        bail!("no HDR inputs");
    }
    std::fs::create_dir_all(&out.out_dir)
        .with_context(|| format!("creating {}", out.out_dir.display()))?;
    let results: Vec<_> = inputs
        .par_iter()
        .map(|path| {
            let id = scene_id(path);
            let run = || -> Result<Scored> {
                let hdr = load_rgbe(path).with_context(|| format!("loading {}", path.display()))?;
                let stack = synth_exposures(&hdr, evs, cfg.key)?;
                if out.dump_stacks {
                    for (img, &ev) in stack.images().iter().zip(evs) {
                        let p = out.out_dir.join(format!("{id}_ev{}.png", ev_label(ev)));
                        save_ldr(&p, img).with_context(|| format!("writing {}", p.display()))?;
                    }
                }
                save_and_score(process(id.clone(), &stack, cfg)?, cfg.backend.id(), out)
            };
            (path.as_path(), run())
        })
        .collect();
    finish(results, cfg, out)
}

pub fn simulate2(stacks: &[String], cfg: &PipelineConfig, out: &SimOutput) -> Result<()> {
    if stacks.is_empty() {
        bail!("no input stacks");
    }
    std::fs::create_dir_all(&out.out_dir)
        .with_context(|| format!("creating {}", out.out_dir.display()))?;
    let results: Vec<_> = stacks
        .par_iter()
        .map(|source| {
            let run = || -> Result<Scored> {
                let (id, files) = stack_files(source)?;
                let stack = load_stack(&files)?;
                save_and_score(process(id, &stack, cfg)?, cfg.backend.id(), out)
            };
            (Path::new(source.as_str()), run())
        })
        .collect();
    finish(results, cfg, out)
}

/// A directory of PNG/PPM files (sorted by name) or a comma-separated file list.
fn stack_files(source: &str) -> Result<(String, Vec<PathBuf>)> {
    let path = Path::new(source);
    if path.is_dir() {
        let mut files = Vec::new();
        for entry in std::fs::read_dir(path).with_context(|| format!("listing {source}"))? {
            let p = entry?.path();
            let ext = p
                .extension()
                .and_then(|e| e.to_str())
                .map(str::to_ascii_lowercase);
            if p.is_file() && ext.is_some_and(|e| LDR_EXTENSIONS.contains(&e.as_str())) {
                files.push(p);
            }
        }
        files.sort();
        if files.is_empty() {
            bail!("no PNG or PPM images in {source}");
        }
        return Ok((scene_id(path), files));
    }
    let files: Vec<PathBuf> = source
        .split(',')
        .filter(|s| !s.is_empty())
        .map(PathBuf::from)
        .collect();
    match files.first() {
        Some(first) => Ok((scene_id(first), files)),
        None => bail!("empty stack `{source}`"),
    }
}

fn scene_id(path: &Path) -> String {
    path.file_stem()
        .or_else(|| path.file_name())
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Scene id with input, original and proposed scores.
type Scored = (String, [Scores; 3]);

fn finish(
    results: Vec<(&Path, Result<Scored>)>,
    cfg: &PipelineConfig,
    out: &SimOutput,
) -> Result<()> {
    let total = results.len();
    let backend = cfg.backend.id();
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    for (path, result) in results {
        let scene = match result {
            Ok(s) => s,
            Err(e) => {
                eprintln!("error: {}: {e:#}", path.display());
                continue;
            }
        };
        let (id, [input, original, proposed]) = scene;
        type Metric = (&'static str, fn(&Scores) -> f64);
        let metrics: [Metric; 2] = [
            ("entropy", |s| s.entropy),
            ("naturalness", |s| s.naturalness),
        ];
        for (metric, get) in metrics {
            rows.push([
                id.clone(),
                metric.to_string(),
                backend.to_string(),
                format!("{:.6}", get(&input)),
                format!("{:.6}", get(&original)),
                format!("{:.6}", get(&proposed)),
            ]);
        }
        for (method, s) in [
            ("input".to_string(), input),
            (format!("{backend}-original"), original),
            (format!("{backend}-proposed"), proposed),
        ] {
            reports.push(MetricsReport {
                image_id: id.clone(),
                method_id: method,
                entropy_bits: s.entropy,
                naturalness: s.naturalness,
            });
        }
    }
    if rows.is_empty() {
        bail!("none of the {total} inputs could be processed");
    }

    match &out.report {
        Some(p) => write_table(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
            &rows,
        )?,
        None => write_table(io::stdout().lock(), &rows)?,
    }
    if let Some(p) = &out.scores {
        let f = File::create(p).with_context(|| format!("creating {}", p.display()))?;
        write_reports_csv(f, &reports)?;
    }
    Ok(())
}

fn save_and_score(r: SceneResult, backend: &str, out: &SimOutput) -> Result<Scored> {
    for (tag, img) in [("original", &r.original), ("proposed", &r.proposed)] {
        let p = out.out_dir.join(format!("{}_{backend}_{tag}.png", r.id));
        save_ldr(&p, img).with_context(|| format!("writing {}", p.display()))?;
    }
    let scores = [score(&r.input)?, score(&r.original)?, score(&r.proposed)?];
    Ok((r.id, scores))
}

pub const TABLE_HEADER: [&str; 6] = [
    "image", "metric", "backend", "input", "original", "proposed",
];

fn write_table<W: Write>(out: W, rows: &[[String; 6]]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TABLE_HEADER)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}
