use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use tremorscope::detector::{detect, Region};
use tremorscope::magnifier::{magnify, MagnificationConfig, StreamMagnifier};
use tremorscope::report::{parse_report, ConfigEcho, TremorReport};
use tremorscope::synth::{render_clip, texture, MotionKind, MotionSpec, CUBIC_SUPPORT};
use tremorscope::video::{
    load_sequence, save_sequence, Frame, SequenceFormat, VideoSequence, Y4mReader, Y4mWriter,
};
use tremorscope::{Error, Plane, Result};

use crate::args::{BenchArgs, DetectArgs, MagnifyArgs, ReportArgs, SynthArgs};
use crate::config::{self, pick, pick_list, DetectorFlags, FileConfig};
use crate::log_line;

/// Target sustained rate for the deployment resolution.
pub const TARGET_FPS: f64 = 45.0;

fn required(v: Option<PathBuf>, what: &str) -> Result<PathBuf> {
    v.ok_or_else(|| Error::Config(format!("missing {what} path")))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_owned(),
        source: e,
    })
}

fn load(path: &Path, fps: Option<f64>) -> Result<VideoSequence> {
    load_sequence(path, SequenceFormat::from_path(path), fps)
}

pub fn cmd_magnify(a: MagnifyArgs, file: &FileConfig) -> Result<()> {
    let cfg = config::magnification(&a.opts, file, None, None)?;
    let fps = pick(a.fps, &file.fps);
    if a.stream || file.stream == Some(true) {
        return magnify_stream(&cfg, fps);
    }
    let input = required(pick(a.input, &file.input), "input")?;
    let output = required(pick(a.output, &file.output), "output")?;
    let seq = load(&input, fps)?;
    let (w, h) = seq.dims().ok_or_else(|| Error::EmptyInput(input.clone()))?;
    cfg.validate_for(seq.fps(), w, h)?;
    let start = Instant::now();
    let out = magnify(&seq, &cfg)?;
    let elapsed = start.elapsed().as_secs_f64();
    save_sequence(&out, &output, SequenceFormat::from_path(&output))?;
    log_line(&[
        ("cmd", "magnify".into()),
        ("mode", cfg.mode.to_string()),
        ("alpha", cfg.alpha.to_string()),
        ("frames", out.len().to_string()),
        ("width", w.to_string()),
        ("height", h.to_string()),
        ("elapsed_s", format!("{elapsed:.3}")),
        (
            "fps_achieved",
            format!("{:.2}", out.len() as f64 / elapsed.max(1e-9)),
        ),
    ]);
    Ok(())
}

fn magnify_stream(cfg: &MagnificationConfig, fps: Option<f64>) -> Result<()> {
    let stdin = std::io::stdin();
    let mut reader = Y4mReader::new(BufReader::new(stdin.lock()))?;
    let fps = fps.unwrap_or(reader.fps());
    let stdout = std::io::stdout();
    let mut writer: Option<Y4mWriter<BufWriter<std::io::StdoutLock<'_>>>> = None;
    let mut out = Some(BufWriter::new(stdout.lock()));
    let mut mag: Option<StreamMagnifier> = None;
    let start = Instant::now();
    let mut n = 0usize;
    while let Some(frame) = reader.read_frame()? {
        let (w, h) = frame.dims();
        if mag.is_none() {
            cfg.validate_for(fps, w, h)?;
            mag = Some(StreamMagnifier::new(cfg, w, h, fps)?);
            writer = Some(Y4mWriter::new(
                out.take().expect("writer created once"),
                w,
                h,
                fps,
            )?);
        }
        let result = mag.as_mut().expect("set above").push(&frame)?;
        writer.as_mut().expect("set above").write_frame(&result)?;
        n += 1;
    }
    if n == 0 {
        return Err(Error::EmptyInput(PathBuf::from("<stdin>")));
    }
    let elapsed = start.elapsed().as_secs_f64();
    log_line(&[
        ("cmd", "magnify".into()),
        ("stream", "true".into()),
        ("mode", cfg.mode.to_string()),
        ("frames", n.to_string()),
        ("elapsed_s", format!("{elapsed:.3}")),
        (
            "fps_achieved",
            format!("{:.2}", n as f64 / elapsed.max(1e-9)),
        ),
    ]);
    Ok(())
}

pub fn cmd_detect(a: DetectArgs, file: &FileConfig) -> Result<()> {
    let det = config::detector(
        DetectorFlags {
            tremor_band: &a.tremor_band,
            breathing_band: &a.breathing_band,
            movement_band: &a.movement_band,
            threshold: a.threshold,
            window_s: a.window_s,
            overlap: a.overlap,
            min_duration_s: a.min_duration_s,
            energy_floor: a.energy_floor,
        },
        file,
    )?;
    let regions = config::regions(&pick_list(&a.regions, &file.regions))?;
    let mut mag = match pick(a.magnify_first, &file.magnify_first) {
        Some(s) => {
            let (mode, alpha) = config::parse_magnify_first(&s)?;
            Some(config::magnification(&a.magnify, file, Some(mode), alpha)?)
        }
        None => None,
    };
    let input = required(pick(a.input, &file.input), "input")?;
    let seq = load(&input, pick(a.fps, &file.fps))?;
    let (w, h) = seq.dims().ok_or_else(|| Error::EmptyInput(input.clone()))?;
    det.validate(seq.fps())?;
    for r in &regions {
        r.check(w, h)?;
    }
    let start = Instant::now();
    let seq = match &mut mag {
        Some(cfg) => {
            cfg.validate_for(seq.fps(), w, h)?;
            // The echoed config carries the depth actually used.
            cfg.depth = Some(cfg.resolve_depth(w, h)?);
            magnify(&seq, cfg)?
        }
        None => seq,
    };
    let detection = detect(&seq, &regions, &det)?;
    let source_id = pick(a.source_id, &file.source_id).unwrap_or_else(|| {
        input.file_name().map_or_else(
            || input.display().to_string(),
            |n| n.to_string_lossy().into_owned(),
        )
    });
    let echo = ConfigEcho {
        detector: det,
        magnification: mag,
        regions: if regions.is_empty() {
            vec![Region::full(w, h)]
        } else {
            regions
        },
    };
    let report = TremorReport::from_detection(source_id, seq.duration_s(), &detection, echo);
    let json = report.to_json();
    match pick(a.report, &file.report) {
        Some(p) => write_file(&p, &json)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(json.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Error::io("<stdout>", e))?;
        }
    }
    if let Some(p) = pick(a.csv, &file.csv) {
        write_file(&p, &report.to_csv())?;
    }
    log_line(&[
        ("cmd", "detect".into()),
        ("frames", seq.len().to_string()),
        ("episodes", report.episodes.len().to_string()),
        (
            "flagged_s",
            format!("{:.3}", report.summary.flagged_seconds),
        ),
        ("max_score", format!("{:.4}", report.summary.max_score)),
        ("elapsed_s", format!("{:.3}", start.elapsed().as_secs_f64())),
    ]);
    Ok(())
}

fn make_texture(name: &str, tw: usize, th: usize, w: usize, h: usize, seed: u64) -> Result<Plane> {
    let (cx, cy) = (tw as f64 / 2.0, th as f64 / 2.0);
    let m = w.min(h) as f64;
    Ok(match name {
        "noise" => texture::filtered_noise(tw, th, 3.0, 0.0, 0.1, seed),
        "blob" => texture::gaussian_blob(tw, th, cx, cy, m / 6.0, 0.5),
        "bar" => texture::limb_bar(tw, th, cx, cy, 0.6 * m, 0.15 * m, 25.0, 3.0),
        "disc" => texture::textured_disc(tw, th, cx, cy, 0.4 * m, 8),
        other => {
            return Err(Error::Config(format!(
                "unknown texture '{other}' (noise, blob, bar, disc)"
            )))
        }
    })
}

pub fn synth_spec(
    a: &SynthArgs,
    file: &FileConfig,
) -> Result<(MotionSpec, String, (usize, usize))> {
    let kind: MotionKind = pick(a.kind.clone(), &file.kind)
        .unwrap_or_else(|| "translate-sin".into())
        .parse()?;
    let duration = pick(a.duration, &file.duration).unwrap_or(5.0);
    let fps = pick(a.fps, &file.fps).unwrap_or(30.0);
    let amplitude = pick(a.amplitude, &file.amplitude).unwrap_or(0.2);
    let mut spec = match kind {
        MotionKind::TranslateSin => MotionSpec::translate_sin(
            amplitude,
            pick(a.frequency, &file.frequency).unwrap_or(2.0),
            duration,
            fps,
        ),
        MotionKind::TranslateRamp => MotionSpec::translate_ramp(amplitude, duration, fps),
        MotionKind::Rotate => MotionSpec::rotate(
            pick(a.angle_rate, &file.angle_rate).unwrap_or(0.5),
            duration,
            fps,
        ),
        MotionKind::Composite => {
            let comps = pick_list(&a.components, &file.components)
                .iter()
                .map(|c| config::parse_component(c))
                .collect::<Result<Vec<_>>>()?;
            if comps.is_empty() {
                return Err(Error::Config(
                    "composite motion needs at least one --component".into(),
                ));
            }
            MotionSpec::composite(comps, duration, fps)
        }
    };
    if let Some(d) = pick(a.direction, &file.direction) {
        spec = spec.with_direction(d);
    }
    let seed = pick(a.seed, &file.seed).unwrap_or(0);
    spec = spec.with_noise(pick(a.noise, &file.noise).unwrap_or(0.0), seed);
    let size = match pick(a.size.clone(), &file.size) {
        Some(s) => config::parse_size(&s, "size")?,
        None => (128, 128),
    };
    spec = spec.with_frame_size(size.0, size.1);
    spec.validate()?;
    let default_texture = if kind == MotionKind::Rotate {
        "disc"
    } else {
        "noise"
    };
    let tex = pick(a.texture.clone(), &file.texture).unwrap_or_else(|| default_texture.into());
    Ok((spec, tex, size))
}

pub fn cmd_synth(a: SynthArgs, file: &FileConfig) -> Result<()> {
    let (spec, tex_name, (w, h)) = synth_spec(&a, file)?;
    let output = required(pick(a.output, &file.output), "output")?;
    let truth_path = pick(a.truth, &file.truth).unwrap_or_else(|| {
        let mut p = output.clone().into_os_string();
        p.push(".truth.txt");
        PathBuf::from(p)
    });
    let gt = spec.ground_truth();
    let margin = gt
        .samples
        .iter()
        .map(|s| s.dx.abs().max(s.dy.abs()))
        .fold(0.0, f64::max)
        .ceil() as usize;
    let pad = 2 * (margin + CUBIC_SUPPORT + 2);
    let (tw, th) = if spec.kind == MotionKind::Rotate {
        let side = (w.max(h) as f64 * std::f64::consts::SQRT_2).ceil() as usize + pad;
        (side, side)
    } else {
        (w + pad, h + pad)
    };
    let tex = Frame::from_luma(0, &make_texture(&tex_name, tw, th, w, h, spec.seed)?);
    let start = Instant::now();
    let (seq, truth) = render_clip(&tex, &spec)?;
    save_sequence(&seq, &output, SequenceFormat::from_path(&output))?;
    write_file(&truth_path, &truth.to_text())?;
    log_line(&[
        ("cmd", "synth".into()),
        ("kind", spec.kind.as_str().into()),
        ("texture", tex_name),
        ("frames", seq.len().to_string()),
        ("width", w.to_string()),
        ("height", h.to_string()),
        ("truth", truth_path.display().to_string()),
        ("elapsed_s", format!("{:.3}", start.elapsed().as_secs_f64())),
    ]);
    Ok(())
}

pub fn cmd_report(a: ReportArgs, file: &FileConfig) -> Result<()> {
    let input = required(pick(a.input, &file.input), "input")?;
    let text = std::fs::read_to_string(&input).map_err(|e| Error::io(&input, e))?;
    let report = parse_report(&text)?;
    if let Some(p) = pick(a.csv, &file.csv) {
        write_file(&p, &report.to_csv())?;
    }
    log_line(&[
        ("cmd", "report".into()),
        ("source_id", report.source_id.clone()),
        ("schema_version", report.schema_version.to_string()),
        ("duration_s", format!("{:.3}", report.clip_duration_s)),
        ("episodes", report.episodes.len().to_string()),
        (
            "flagged_s",
            format!("{:.3}", report.summary.flagged_seconds),
        ),
        (
            "flagged_fraction",
            format!("{:.4}", report.summary.flagged_fraction),
        ),
        ("max_score", format!("{:.4}", report.summary.max_score)),
    ]);
    Ok(())
}

/// Throughput of the streaming magnifier.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchResult {
    pub width: usize,
    pub height: usize,
    pub frames: usize,
    pub elapsed_s: f64,
    pub fps: f64,
    pub threads: usize,
}

/// Frames are a translating noise texture; a short set is rendered once and
/// cycled so the timing covers only magnification.
pub fn run_bench(
    cfg: &MagnificationConfig,
    width: usize,
    height: usize,
    fps: f64,
    seconds: f64,
) -> Result<BenchResult> {
    cfg.validate_for(fps, width, height)?;
    if !(seconds > 0.0 && seconds.is_finite()) {
        return Err(Error::Config(format!("seconds must be > 0, got {seconds}")));
    }
    let frames = ((seconds * fps).round() as usize).max(2);
    const DISTINCT: usize = 16;
    let tex = Frame::from_luma(
        0,
        &texture::filtered_noise(width + 12, height + 12, 3.0, 0.0, 0.1, 1),
    );
    let spec = MotionSpec::translate_sin(0.3, 5.0, DISTINCT as f64 / fps, fps)
        .with_frame_size(width, height);
    let (src, _) = render_clip(&tex, &spec)?;
    let mut mag = StreamMagnifier::new(cfg, width, height, fps)?;
    let start = Instant::now();
    for i in 0..frames {
        let f = src.frames()[i % src.len()].clone().with_index(i);
        std::hint::black_box(mag.push(&f)?);
    }
    let elapsed_s = start.elapsed().as_secs_f64();
    Ok(BenchResult {
        width,
        height,
        frames,
        elapsed_s,
        fps: frames as f64 / elapsed_s.max(1e-9),
        threads: rayon::current_num_threads(),
    })
}

pub fn cmd_bench(a: BenchArgs, file: &FileConfig) -> Result<()> {
    let (w, h) = config::parse_size(
        &pick(a.res, &file.res).unwrap_or_else(|| "640x480".into()),
        "res",
    )?;
    let fps = pick(a.fps, &file.fps).unwrap_or(30.0);
    let seconds = pick(a.seconds, &file.seconds).unwrap_or(5.0);
    let mode = pick(a.magnify.mode.clone(), &file.mode).unwrap_or_else(|| "dynamic".into());
    let mut cfg = config::magnification(&a.magnify, file, Some(mode), None)?;
    if cfg.depth.is_none() && tremorscope::pyramid::max_depth(w, h) >= 4 {
        cfg.depth = Some(4);
    }
    let r = run_bench(&cfg, w, h, fps, seconds)?;
    log_line(&[
        ("cmd", "bench".into()),
        ("mode", cfg.mode.to_string()),
        ("res", format!("{w}x{h}")),
        ("depth", cfg.resolve_depth(w, h)?.to_string()),
        ("frames", r.frames.to_string()),
        ("threads", r.threads.to_string()),
        ("elapsed_s", format!("{:.3}", r.elapsed_s)),
        ("fps", format!("{:.2}", r.fps)),
        ("target_fps", TARGET_FPS.to_string()),
        ("meets_target", (r.fps >= TARGET_FPS).to_string()),
    ]);
    Ok(())
}
