//! Versioned JSON tremor reports and CSV episode export.

use serde::{Deserialize, Serialize};

use crate::detector::{Detection, DetectorConfig, Region, TremorEpisode};
use crate::error::{Error, Result};
use crate::magnifier::MagnificationConfig;

pub const SCHEMA_VERSION: u64 = 1;

/// Settings that produced a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub detector: DetectorConfig,
    /// Present when the clip was magnified before detection.
    pub magnification: Option<MagnificationConfig>,
    pub regions: Vec<Region>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    /// Length of the union of all episode intervals.
    pub flagged_seconds: f64,
    pub flagged_fraction: f64,
    /// Highest window score seen, flagged or not.
    pub max_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TremorReport {
    pub schema_version: u64,
    pub source_id: String,
    pub clip_duration_s: f64,
    pub config: ConfigEcho,
    /// Sorted by start time, then region; disjoint within a region.
    pub episodes: Vec<TremorEpisode>,
    pub summary: Summary,
}

fn union_length(episodes: &[TremorEpisode], duration: f64) -> f64 {
    let mut spans: Vec<(f64, f64)> = episodes
        .iter()
        .map(|e| (e.start_s.max(0.0), e.end_s.min(duration)))
        .filter(|(a, b)| b > a)
        .collect();
    spans.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut total = 0.0;
    let mut cur: Option<(f64, f64)> = None;
    for (a, b) in spans {
        cur = match cur {
            Some((s, e)) if a <= e => Some((s, e.max(b))),
            Some((s, e)) => {
                total += e - s;
                Some((a, b))
            }
            None => Some((a, b)),
        };
    }
    if let Some((s, e)) = cur {
        total += e - s;
    }
    total
}

fn sort_episodes(episodes: &mut [TremorEpisode]) {
    episodes.sort_by(|a, b| {
        a.start_s
            .total_cmp(&b.start_s)
            .then_with(|| a.region.cmp(&b.region))
    });
}

impl TremorReport {
    /// Builds a report from episodes; `max_score` defaults to the best
    /// episode score.
    pub fn from_episodes(
        source_id: impl Into<String>,
        clip_duration_s: f64,
        mut episodes: Vec<TremorEpisode>,
        config: ConfigEcho,
        max_score: Option<f64>,
    ) -> Self {
        sort_episodes(&mut episodes);
        let flagged_seconds = union_length(&episodes, clip_duration_s);
        let max_score =
            max_score.unwrap_or_else(|| episodes.iter().map(|e| e.score).fold(0.0, f64::max));
        Self {
            schema_version: SCHEMA_VERSION,
            source_id: source_id.into(),
            clip_duration_s,
            config,
            episodes,
            summary: Summary {
                flagged_seconds,
                flagged_fraction: if clip_duration_s > 0.0 {
                    flagged_seconds / clip_duration_s
                } else {
                    0.0
                },
                max_score,
            },
        }
    }

    pub fn from_detection(
        source_id: impl Into<String>,
        clip_duration_s: f64,
        detection: &Detection,
        config: ConfigEcho,
    ) -> Self {
        Self::from_episodes(
            source_id,
            clip_duration_s,
            detection.episodes(),
            config,
            Some(detection.max_score()),
        )
    }

    /// Checks the structural invariants a parsed report must satisfy.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::MalformedReport(m));
        if !(self.clip_duration_s >= 0.0 && self.clip_duration_s.is_finite()) {
            return bad(format!(
                "clip_duration_s {} is not a finite non-negative number",
                self.clip_duration_s
            ));
        }
        for (i, e) in self.episodes.iter().enumerate() {
            if !(e.start_s.is_finite() && e.end_s.is_finite() && e.end_s > e.start_s) {
                return bad(format!("episode {i} has end_s <= start_s"));
            }
            if !(0.0..=1.0).contains(&e.score) {
                return bad(format!("episode {i} score {} outside [0, 1]", e.score));
            }
            if !(e.tremor_energy.is_finite() && e.total_energy.is_finite()) {
                return bad(format!("episode {i} has non-finite energy"));
            }
        }
        for (i, w) in self.episodes.windows(2).enumerate() {
            let order = w[0]
                .start_s
                .total_cmp(&w[1].start_s)
                .then_with(|| w[0].region.cmp(&w[1].region));
            if order == std::cmp::Ordering::Greater {
                return bad(format!("episodes {i} and {} are out of order", i + 1));
            }
        }
        for (i, a) in self.episodes.iter().enumerate() {
            if let Some(b) = self.episodes[i + 1..]
                .iter()
                .find(|b| b.region == a.region && b.start_s < a.end_s)
            {
                return bad(format!(
                    "episodes [{}, {}] and [{}, {}] overlap in region {:?}",
                    a.start_s, a.end_s, b.start_s, b.end_s, a.region
                ));
            }
        }
        let s = &self.summary;
        if !(s.flagged_seconds >= 0.0 && s.flagged_seconds <= self.clip_duration_s + 1e-9) {
            return bad(format!(
                "flagged_seconds {} exceeds clip duration {}",
                s.flagged_seconds, self.clip_duration_s
            ));
        }
        if !((0.0..=1.0).contains(&s.flagged_fraction) && (0.0..=1.0).contains(&s.max_score)) {
            return bad("summary fractions must lie in [0, 1]".into());
        }
        Ok(())
    }

    /// Pretty-printed JSON with a fixed key order and a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report fields are serializable");
        s.push('\n');
        s
    }

    /// Episodes as CSV with a header row.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "region",
            "start_s",
            "end_s",
            "tremor_energy",
            "total_energy",
            "score",
            "flag",
        ])
        .expect("in-memory write");
        for e in &self.episodes {
            w.write_record([
                e.region.clone(),
                e.start_s.to_string(),
                e.end_s.to_string(),
                e.tremor_energy.to_string(),
                e.total_energy.to_string(),
                e.score.to_string(),
                e.flag.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
    }
}

pub fn emit_report(report: &TremorReport) -> String {
    report.to_json()
}

/// Parses and validates a report. The schema version is checked before the
/// rest of the document so a newer report is reported as such.
pub fn parse_report(document: &str) -> Result<TremorReport> {
    let value: serde_json::Value =
        serde_json::from_str(document).map_err(|e| Error::MalformedReport(e.to_string()))?;
    let version = value
        .get("schema_version")
        .ok_or_else(|| Error::MalformedReport("missing schema_version".into()))?
        .as_u64()
        .ok_or_else(|| {
            Error::MalformedReport("schema_version is not an unsigned integer".into())
        })?;
    if version != SCHEMA_VERSION {
        return Err(Error::UnknownSchemaVersion(version));
    }
    let report: TremorReport =
        serde_json::from_value(value).map_err(|e| Error::MalformedReport(e.to_string()))?;
    report.validate()?;
    Ok(report)
}
