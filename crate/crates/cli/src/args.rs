use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Motion magnification and tremor detection for bedside video.
///
/// Every flag may also be set in the `--config` TOML file under the same name
/// with dashes replaced by underscores. Flags win over the file.
#[derive(Debug, Parser)]
#[command(name = "tremorscope", version)]
pub struct Cli {
    /// TOML file with default values for any flag.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Magnify a clip (y4m file or PNG/PPM frame directory).
    Magnify(MagnifyArgs),
    /// Score tremor episodes and write a JSON report.
    Detect(DetectArgs),
    /// Render a synthetic clip plus its ground-truth sidecar.
    Synth(SynthArgs),
    /// Validate a report and print its summary, optionally exporting CSV.
    Report(ReportArgs),
    /// Measure magnification throughput on synthetic frames.
    Bench(BenchArgs),
}

#[derive(Debug, Args, Default)]
pub struct MagnifyOpts {
    /// static, dynamic or temporal.
    #[arg(long)]
    pub mode: Option<String>,
    /// Amplification factor; defaults to 10 (static, dynamic) or 20 (temporal).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Temporal pass band `lo,hi` in Hz.
    #[arg(long, value_name = "LO,HI")]
    pub band: Option<String>,
    /// Pyramid band-pass levels.
    #[arg(long)]
    pub depth: Option<usize>,
    /// Fraction of alpha applied to chroma.
    #[arg(long)]
    pub chroma_gain: Option<f64>,
    /// Per-level alpha multipliers, finest first, comma separated.
    #[arg(long, value_name = "T0,T1,..")]
    pub taper: Option<String>,
}

#[derive(Debug, Args)]
pub struct MagnifyArgs {
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub opts: MagnifyOpts,
    /// Frame rate for frame directories; overrides a y4m header.
    #[arg(long)]
    pub fps: Option<f64>,
    /// Read y4m from stdin and write y4m to stdout, frame by frame.
    #[arg(long)]
    pub stream: bool,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    pub input: Option<PathBuf>,
    /// Report path; stdout when absent.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Also write episodes as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Region `[id=]x,y,w,h`; repeatable. Default is the whole frame.
    #[arg(long = "region", value_name = "RECT")]
    pub regions: Vec<String>,
    /// Tremor band in Hz; default 4,10.
    #[arg(long, value_name = "LO,HI")]
    pub tremor_band: Option<String>,
    /// Breathing band in Hz; default 0.3,1.5.
    #[arg(long, value_name = "LO,HI")]
    pub breathing_band: Option<String>,
    /// Gross-movement band in Hz; default 0,3.
    #[arg(long, value_name = "LO,HI")]
    pub movement_band: Option<String>,
    /// Window score above which a window is flagged; default 0.5.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Analysis window in seconds; default 4.
    #[arg(long)]
    pub window_s: Option<f64>,
    /// Window overlap fraction in [0, 1); default 0.5.
    #[arg(long)]
    pub overlap: Option<f64>,
    /// Shortest reported episode in seconds; default 2.
    #[arg(long)]
    pub min_duration_s: Option<f64>,
    /// Windows with total band energy at or below this score 0; default 0.
    #[arg(long)]
    pub energy_floor: Option<f64>,
    /// Magnify before detecting: `mode[,alpha]`.
    #[arg(long, value_name = "MODE[,ALPHA]")]
    pub magnify_first: Option<String>,
    /// Options for `--magnify-first`.
    #[command(flatten)]
    pub magnify: MagnifyOpts,
    #[arg(long)]
    pub fps: Option<f64>,
    /// Identifier stored in the report; defaults to the input file name.
    #[arg(long)]
    pub source_id: Option<String>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Output clip (`.y4m` or a frame directory).
    pub output: Option<PathBuf>,
    /// Ground-truth sidecar; defaults to `<output>.truth.txt`.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// translate-sin, translate-ramp, rotate or composite.
    #[arg(long)]
    pub kind: Option<String>,
    /// Peak displacement in px.
    #[arg(long)]
    pub amplitude: Option<f64>,
    /// Hz.
    #[arg(long)]
    pub frequency: Option<f64>,
    /// Degrees per frame (rotate).
    #[arg(long)]
    pub angle_rate: Option<f64>,
    /// Translation direction in degrees.
    #[arg(long)]
    pub direction: Option<f64>,
    /// Seconds.
    #[arg(long)]
    pub duration: Option<f64>,
    #[arg(long)]
    pub fps: Option<f64>,
    /// Gaussian luma noise sigma.
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// noise, blob, bar or disc.
    #[arg(long)]
    pub texture: Option<String>,
    /// Frame size `WxH`.
    #[arg(long, value_name = "WxH")]
    pub size: Option<String>,
    /// Composite component `amplitude,frequency,direction,start,end[,label]`;
    /// repeatable.
    #[arg(long = "component", value_name = "SPEC")]
    pub components: Vec<String>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    pub input: Option<PathBuf>,
    /// Write the episodes as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Frame size `WxH`.
    #[arg(long, value_name = "WxH")]
    pub res: Option<String>,
    #[arg(long)]
    pub fps: Option<f64>,
    /// Seconds of video to process.
    #[arg(long)]
    pub seconds: Option<f64>,
    #[command(flatten)]
    pub magnify: MagnifyOpts,
}
