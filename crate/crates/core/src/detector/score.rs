//! Band-energy scoring of window spectra and episode merging.

use serde::{Deserialize, Serialize};

use super::spectrum::WindowSpectrum;
use super::{BandSpec, DetectorConfig};

/// Which band a spectral bin is attributed to. Bins are assigned in priority
/// order tremor, breathing, movement, so every bin counts at most once.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinClass {
    Tremor,
    Breathing,
    Movement,
    Unassigned,
}

/// Tremor claims `B` and the harmonic band `2B`; a rectified difference
/// signal carries symmetric oscillation at twice its frequency.
pub fn classify(f: f64, bands: &BandSpec, nyquist: f64) -> BinClass {
    if f <= 0.0 || f > nyquist {
        BinClass::Unassigned
    } else if bands.tremor.contains(f) || bands.tremor.scaled(2.0).contains(f) {
        BinClass::Tremor
    } else if bands.breathing.contains(f) {
        BinClass::Breathing
    } else if bands.movement.contains(f) {
        BinClass::Movement
    } else {
        BinClass::Unassigned
    }
}

/// Integrated power per band for one window.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BandEnergies {
    pub tremor: f64,
    pub breathing: f64,
    pub movement: f64,
}

impl BandEnergies {
    pub fn total(&self) -> f64 {
        self.tremor + self.breathing + self.movement
    }

    /// `tremor / total`, zero when the total does not exceed `floor`.
    pub fn score(&self, floor: f64) -> f64 {
        let total = self.total();
        if total <= floor || total <= 0.0 {
            0.0
        } else {
            (self.tremor / total).clamp(0.0, 1.0)
        }
    }
}

pub fn band_energies(spectrum: &WindowSpectrum, bands: &BandSpec, fps: f64) -> BandEnergies {
    let nyquist = fps / 2.0;
    let mut e = BandEnergies::default();
    for (k, p) in spectrum.power.iter().enumerate() {
        let p = p * spectrum.resolution;
        match classify(spectrum.frequency(k), bands, nyquist) {
            BinClass::Tremor => e.tremor += p,
            BinClass::Breathing => e.breathing += p,
            BinClass::Movement => e.movement += p,
            BinClass::Unassigned => {}
        }
    }
    e
}

/// Score of one analysis window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowScore {
    pub start_s: f64,
    pub end_s: f64,
    pub energies: BandEnergies,
    pub score: f64,
    pub flag: bool,
}

/// A run of consecutive flagged windows in one region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TremorEpisode {
    pub region: String,
    pub start_s: f64,
    pub end_s: f64,
    /// Band energies summed over the merged windows.
    pub tremor_energy: f64,
    pub total_energy: f64,
    /// `tremor_energy / total_energy`; above the threshold whenever every
    /// merged window is.
    pub score: f64,
    pub flag: bool,
}

pub fn score_each_window(
    spectra: &[WindowSpectrum],
    cfg: &DetectorConfig,
    fps: f64,
) -> Vec<WindowScore> {
    spectra
        .iter()
        .map(|s| {
            let energies = band_energies(s, &cfg.bands, fps);
            let score = energies.score(cfg.energy_floor);
            WindowScore {
                start_s: s.start_s,
                end_s: s.end_s,
                energies,
                score,
                flag: score > cfg.threshold,
            }
        })
        .collect()
}

/// Merges consecutive flagged windows and drops runs shorter than
/// `min_duration_s`. Windows must be in time order.
pub fn merge_episodes(
    region: &str,
    windows: &[WindowScore],
    min_duration_s: f64,
) -> Vec<TremorEpisode> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < windows.len() {
        if !windows[i].flag {
            i += 1;
            continue;
        }
        let mut j = i;
        while j + 1 < windows.len() && windows[j + 1].flag {
            j += 1;
        }
        let run = &windows[i..=j];
        let tremor: f64 = run.iter().map(|w| w.energies.tremor).sum();
        let total: f64 = run.iter().map(|w| w.energies.total()).sum();
        let (start_s, end_s) = (run[0].start_s, run[run.len() - 1].end_s);
        if end_s - start_s >= min_duration_s {
            out.push(TremorEpisode {
                region: region.to_string(),
                start_s,
                end_s,
                tremor_energy: tremor,
                total_energy: total,
                score: if total > 0.0 {
                    (tremor / total).clamp(0.0, 1.0)
                } else {
                    0.0
                },
                flag: true,
            });
        }
        i = j + 1;
    }
    out
}

pub fn score_windows(
    region: &str,
    spectra: &[WindowSpectrum],
    cfg: &DetectorConfig,
    fps: f64,
) -> Vec<TremorEpisode> {
    merge_episodes(
        region,
        &score_each_window(spectra, cfg, fps),
        cfg.min_duration_s,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detector::Band;

    fn window(start: f64, flag: bool) -> WindowScore {
        WindowScore {
            start_s: start,
            end_s: start + 4.0,
            energies: BandEnergies {
                tremor: if flag { 3.0 } else { 0.0 },
                breathing: 1.0,
                movement: 0.0,
            },
            score: if flag { 0.75 } else { 0.0 },
            flag,
        }
    }

    #[test]
    fn bins_are_partitioned_by_priority() {
        let b = BandSpec::default();
        assert_eq!(classify(0.0, &b, 15.0), BinClass::Unassigned);
        assert_eq!(classify(0.25, &b, 15.0), BinClass::Movement);
        assert_eq!(classify(1.0, &b, 15.0), BinClass::Breathing);
        assert_eq!(classify(2.0, &b, 15.0), BinClass::Movement);
        assert_eq!(classify(3.5, &b, 15.0), BinClass::Unassigned);
        assert_eq!(classify(6.0, &b, 15.0), BinClass::Tremor);
        assert_eq!(classify(14.0, &b, 15.0), BinClass::Tremor);
        assert_eq!(classify(16.0, &b, 20.0), BinClass::Tremor);
        assert_eq!(classify(21.0, &b, 30.0), BinClass::Unassigned);
        let wide = BandSpec {
            tremor: Band::new(2.0, 4.0),
            ..BandSpec::default()
        };
        assert_eq!(classify(2.5, &wide, 15.0), BinClass::Tremor);
    }

    #[test]
    fn adjacent_flags_merge() {
        let w = [
            window(0.0, false),
            window(2.0, true),
            window(4.0, true),
            window(6.0, false),
            window(8.0, true),
        ];
        let eps = merge_episodes("r", &w, 2.0);
        assert_eq!(eps.len(), 2);
        assert_eq!((eps[0].start_s, eps[0].end_s), (2.0, 8.0));
        assert_eq!((eps[1].start_s, eps[1].end_s), (8.0, 12.0));
        assert!((eps[0].score - 0.75).abs() < 1e-12);
        assert!((eps[0].tremor_energy - 6.0).abs() < 1e-12);
        assert!(merge_episodes("r", &w, 5.0).len() == 1);
    }

    #[test]
    fn zero_energy_scores_zero() {
        assert_eq!(BandEnergies::default().score(0.0), 0.0);
        let e = BandEnergies {
            tremor: 1.0,
            breathing: 0.0,
            movement: 0.0,
        };
        assert_eq!(e.score(0.0), 1.0);
        assert_eq!(e.score(2.0), 0.0);
    }
}
