//! Config file and value parsing. File keys are flag names with underscores.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use tremorscope::detector::{Band, BandSpec, DetectorConfig, Region};
use tremorscope::magnifier::{MagnificationConfig, Mode};
use tremorscope::synth::MotionComponent;
use tremorscope::{Error, Result};

use crate::args::MagnifyOpts;

#[derive(Debug, Default, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub threads: Option<usize>,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub fps: Option<f64>,
    pub stream: Option<bool>,
    pub mode: Option<String>,
    pub alpha: Option<f64>,
    pub band: Option<String>,
    pub depth: Option<usize>,
    pub chroma_gain: Option<f64>,
    #[serde(alias = "level_alpha_taper")]
    pub taper: Option<String>,
    pub report: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    #[serde(alias = "region")]
    pub regions: Option<Vec<String>>,
    pub tremor_band: Option<String>,
    pub breathing_band: Option<String>,
    pub movement_band: Option<String>,
    pub threshold: Option<f64>,
    pub window_s: Option<f64>,
    pub overlap: Option<f64>,
    pub min_duration_s: Option<f64>,
    pub energy_floor: Option<f64>,
    pub magnify_first: Option<String>,
    pub source_id: Option<String>,
    pub truth: Option<PathBuf>,
    pub kind: Option<String>,
    pub amplitude: Option<f64>,
    pub frequency: Option<f64>,
    pub angle_rate: Option<f64>,
    pub direction: Option<f64>,
    pub duration: Option<f64>,
    pub noise: Option<f64>,
    pub seed: Option<u64>,
    pub texture: Option<String>,
    pub size: Option<String>,
    #[serde(alias = "component")]
    pub components: Option<Vec<String>>,
    pub res: Option<String>,
    pub seconds: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_owned(),
            source: e,
        })?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            e => e,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))
    }
}

/// Flag value if given, else the file value.
pub fn pick<T: Clone>(flag: Option<T>, file: &Option<T>) -> Option<T> {
    flag.or_else(|| file.clone())
}

/// Repeatable flags replace the file list rather than extending it.
pub fn pick_list(flag: &[String], file: &Option<Vec<String>>) -> Vec<String> {
    if flag.is_empty() {
        file.clone().unwrap_or_default()
    } else {
        flag.to_vec()
    }
}

fn numbers(s: &str, what: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Config(format!("{what} {s:?} is not a comma-separated number list")))
}

pub fn parse_band(s: &str, what: &str) -> Result<Band> {
    match numbers(s, what)?[..] {
        [lo, hi] => Ok(Band::new(lo, hi)),
        _ => Err(Error::Config(format!("{what} {s:?} is not lo,hi"))),
    }
}

pub fn parse_size(s: &str, what: &str) -> Result<(usize, usize)> {
    let bad = || Error::Config(format!("{what} {s:?} is not WxH"));
    let (w, h) = s
        .to_ascii_lowercase()
        .split_once('x')
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .ok_or_else(bad)?;
    let w: usize = w.trim().parse().map_err(|_| bad())?;
    let h: usize = h.trim().parse().map_err(|_| bad())?;
    if w == 0 || h == 0 {
        return Err(bad());
    }
    Ok((w, h))
}

/// `amplitude,frequency,direction,start,end[,label]`
pub fn parse_component(s: &str) -> Result<MotionComponent> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let bad = || {
        Error::Config(format!(
            "component {s:?} is not amplitude,frequency,direction,start,end[,label]"
        ))
    };
    if parts.len() < 5 || parts.len() > 6 {
        return Err(bad());
    }
    let v: Vec<f64> = parts[..5]
        .iter()
        .map(|p| p.parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| bad())?;
    Ok(MotionComponent {
        amplitude: v[0],
        frequency: v[1],
        direction_deg: v[2],
        start_s: v[3],
        end_s: v[4],
        label: parts.get(5).map_or("motion", |l| l).to_string(),
    })
}

/// Magnification settings from flags over file values. `mode` may be
/// supplied by the caller (e.g. from `--magnify-first`).
pub fn magnification(
    opts: &MagnifyOpts,
    file: &FileConfig,
    mode: Option<String>,
    alpha: Option<f64>,
) -> Result<MagnificationConfig> {
    let mode: Mode = mode
        .or_else(|| pick(opts.mode.clone(), &file.mode))
        .ok_or_else(|| Error::Config("--mode is required".into()))?
        .parse()?;
    let mut cfg = MagnificationConfig::new(mode);
    if let Some(a) = alpha.or_else(|| pick(opts.alpha, &file.alpha)) {
        cfg.alpha = a;
    }
    if let Some(b) = pick(opts.band.clone(), &file.band) {
        let b = parse_band(&b, "band")?;
        cfg = cfg.with_band(b.lo, b.hi);
    }
    cfg.depth = pick(opts.depth, &file.depth);
    if let Some(g) = pick(opts.chroma_gain, &file.chroma_gain) {
        cfg.chroma_gain = g;
    }
    if let Some(t) = pick(opts.taper.clone(), &file.taper) {
        cfg.level_alpha_taper = Some(numbers(&t, "taper")?);
    }
    cfg.validate()?;
    Ok(cfg)
}

/// `mode[,alpha]`
pub fn parse_magnify_first(s: &str) -> Result<(String, Option<f64>)> {
    match s.split_once(',') {
        None => Ok((s.trim().to_string(), None)),
        Some((m, a)) => {
            let a: f64 = a
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("magnify_first {s:?} is not mode[,alpha]")))?;
            Ok((m.trim().to_string(), Some(a)))
        }
    }
}

pub fn regions(list: &[String]) -> Result<Vec<Region>> {
    let regions: Vec<Region> = list.iter().map(|r| r.parse()).collect::<Result<_>>()?;
    for (i, r) in regions.iter().enumerate() {
        if regions[..i].iter().any(|q| q.id == r.id) {
            return Err(Error::Config(format!("duplicate region id {:?}", r.id)));
        }
        if r.w == 0 || r.h == 0 {
            return Err(Error::Config(format!("region {:?} is empty", r.id)));
        }
    }
    Ok(regions)
}

pub struct DetectorFlags<'a> {
    pub tremor_band: &'a Option<String>,
    pub breathing_band: &'a Option<String>,
    pub movement_band: &'a Option<String>,
    pub threshold: Option<f64>,
    pub window_s: Option<f64>,
    pub overlap: Option<f64>,
    pub min_duration_s: Option<f64>,
    pub energy_floor: Option<f64>,
}

pub fn detector(flags: DetectorFlags<'_>, file: &FileConfig) -> Result<DetectorConfig> {
    let mut cfg = DetectorConfig::default();
    let bands = BandSpec::default();
    let band =
        |flag: &Option<String>, file: &Option<String>, what: &str, default: Band| -> Result<Band> {
            pick(flag.clone(), file).map_or(Ok(default), |s| parse_band(&s, what))
        };
    cfg.bands = BandSpec {
        tremor: band(
            flags.tremor_band,
            &file.tremor_band,
            "tremor_band",
            bands.tremor,
        )?,
        breathing: band(
            flags.breathing_band,
            &file.breathing_band,
            "breathing_band",
            bands.breathing,
        )?,
        movement: band(
            flags.movement_band,
            &file.movement_band,
            "movement_band",
            bands.movement,
        )?,
    };
    if let Some(v) = pick(flags.threshold, &file.threshold) {
        cfg.threshold = v;
    }
    if let Some(v) = pick(flags.window_s, &file.window_s) {
        cfg.window_s = v;
    }
    if let Some(v) = pick(flags.overlap, &file.overlap) {
        cfg.overlap = v;
    }
    if let Some(v) = pick(flags.min_duration_s, &file.min_duration_s) {
        cfg.min_duration_s = v;
    }
    if let Some(v) = pick(flags.energy_floor, &file.energy_floor) {
        cfg.energy_floor = v;
    }
    Ok(cfg)
}
