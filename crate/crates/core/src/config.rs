//! The single TOML configuration file. Each section mirrors one module;
//! every key has a default and unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::binarizer::FcmParams;
use crate::error::{Error, Result};
use crate::localizer::{LocalizerParams, TrainParams};
use crate::mfi::BandParams;
use crate::recognizer::{FuzzyKnnParams, MembershipMode};
use crate::textline::{BankParams, SegmentParams, NORMALIZED_HEIGHT};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub mfi: MfiConfig,
    pub localizer: LocalizerConfig,
    pub binarizer: FcmParams,
    pub gabor: GaborConfig,
    pub textline: TextlineConfig,
    pub recognizer: RecognizerConfig,
    pub paths: PathsConfig,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MfiConfig {
    pub window_length: usize,
    pub edge_density_threshold: f64,
    pub min_band_thickness: usize,
    pub max_row_gap: usize,
    pub max_col_gap: usize,
}

impl Default for MfiConfig {
    fn default() -> Self {
        let b = BandParams::default();
        MfiConfig {
            window_length: 5,
            edge_density_threshold: b.edge_density_threshold,
            min_band_thickness: b.min_band_thickness,
            max_row_gap: b.max_row_gap,
            max_col_gap: b.max_col_gap,
        }
    }
}

impl MfiConfig {
    pub fn band_params(&self) -> BandParams {
        BandParams {
            edge_density_threshold: self.edge_density_threshold,
            min_band_thickness: self.min_band_thickness,
            max_row_gap: self.max_row_gap,
            max_col_gap: self.max_col_gap,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LocalizerConfig {
    pub threshold: f64,
    pub min_zone_width: usize,
    pub min_zone_height: usize,
    /// Tighten each zone by repeating the band elimination inside it.
    pub refine_zones: bool,
    /// During refinement a row or column must also reach this fraction of
    /// the zone's densest one.
    pub refine_peak_ratio: f64,
    /// Margin in pixels added around a detected box before recognition.
    pub crop_margin: usize,
    pub epochs: usize,
    pub learning_rate: f64,
}

impl Default for LocalizerConfig {
    fn default() -> Self {
        let p = LocalizerParams::default();
        let t = TrainParams::default();
        LocalizerConfig {
            threshold: p.threshold,
            min_zone_width: p.min_zone_width,
            min_zone_height: p.min_zone_height,
            refine_zones: true,
            refine_peak_ratio: 0.2,
            crop_margin: 2,
            epochs: t.epochs,
            learning_rate: t.learning_rate,
        }
    }
}

impl LocalizerConfig {
    pub fn params(&self) -> LocalizerParams {
        LocalizerParams {
            threshold: self.threshold,
            min_zone_width: self.min_zone_width,
            min_zone_height: self.min_zone_height,
        }
    }

    pub fn train_params(&self, seed: u64) -> TrainParams {
        TrainParams {
            epochs: self.epochs,
            learning_rate: self.learning_rate,
            seed,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GaborConfig {
    pub enabled: bool,
    pub wavelength_factor: f64,
    pub sigma_ratio: f64,
    pub gamma: f64,
    pub orientations: usize,
}

impl Default for GaborConfig {
    fn default() -> Self {
        let b = BankParams::default();
        GaborConfig {
            enabled: true,
            wavelength_factor: b.wavelength_factor,
            sigma_ratio: b.sigma_ratio,
            gamma: b.gamma,
            orientations: b.orientations,
        }
    }
}

impl GaborConfig {
    pub fn bank_params(&self) -> BankParams {
        BankParams {
            wavelength_factor: self.wavelength_factor,
            sigma_ratio: self.sigma_ratio,
            gamma: self.gamma,
            orientations: self.orientations,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TextlineConfig {
    pub normalized_height: usize,
    pub band_halfwidth: usize,
    /// Components smaller than this are removed after binarization.
    pub despeckle_area: usize,
    pub gap_threshold: usize,
    pub min_segment_width: usize,
    pub min_segment_area: usize,
    /// A gap between glyphs at least this multiple of the line's median
    /// glyph gap is read as a word break; 0 disables.
    pub word_gap_factor: f64,
}

impl Default for TextlineConfig {
    fn default() -> Self {
        let s = SegmentParams::default();
        TextlineConfig {
            normalized_height: NORMALIZED_HEIGHT,
            band_halfwidth: 2,
            despeckle_area: 3,
            gap_threshold: s.gap_threshold,
            min_segment_width: s.min_segment_width,
            min_segment_area: s.min_segment_area,
            word_gap_factor: 1.6,
        }
    }
}

impl TextlineConfig {
    pub fn segment_params(&self) -> SegmentParams {
        SegmentParams {
            gap_threshold: self.gap_threshold,
            min_segment_width: self.min_segment_width,
            min_segment_area: self.min_segment_area,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RecognizerConfig {
    pub k: usize,
    pub m: f64,
    pub membership_mode: MembershipMode,
    pub k_init: usize,
    pub max_edit_distance: usize,
}

impl Default for RecognizerConfig {
    fn default() -> Self {
        let p = FuzzyKnnParams::default();
        RecognizerConfig {
            k: p.k,
            m: p.m,
            membership_mode: MembershipMode::Crisp,
            k_init: 5,
            max_edit_distance: 1,
        }
    }
}

impl RecognizerConfig {
    pub fn knn(&self) -> FuzzyKnnParams {
        FuzzyKnnParams { k: self.k, m: self.m }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PathsConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub localizer_model: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recognizer_model: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lexicon: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub debug_dir: Option<PathBuf>,
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: PipelineConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.mfi.window_length == 0 {
            return bad("mfi.window_length must be positive".into());
        }
        if !(self.localizer.threshold > 0.0 && self.localizer.threshold < 1.0) {
            return bad(format!("localizer.threshold {} outside (0, 1)", self.localizer.threshold));
        }
        if !(0.0..1.0).contains(&self.localizer.refine_peak_ratio) {
            return bad("localizer.refine_peak_ratio must lie in [0, 1)".into());
        }
        if self.binarizer.clusters < 2 || self.binarizer.m <= 1.0 {
            return bad("binarizer needs clusters >= 2 and m > 1".into());
        }
        if self.gabor.orientations == 0 || self.gabor.sigma_ratio <= 0.0 || self.gabor.gamma <= 0.0 {
            return bad("gabor orientations, sigma_ratio and gamma must be positive".into());
        }
        if !(self.textline.word_gap_factor >= 0.0) {
            return bad("textline.word_gap_factor must be non-negative".into());
        }
        if self.textline.normalized_height == 0 {
            return bad("textline.normalized_height must be positive".into());
        }
        if self.recognizer.k == 0 || self.recognizer.m <= 1.0 {
            return bad("recognizer needs k >= 1 and m > 1".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = PipelineConfig::from_toml("").unwrap();
        assert_eq!(cfg, PipelineConfig::default());
        assert_eq!(cfg.textline.normalized_height, 26);
        assert_eq!(cfg.recognizer.k, 10);
        assert_eq!(cfg.mfi.window_length, 5);
    }

    #[test]
    fn round_trip() {
        let mut cfg = PipelineConfig::default();
        cfg.recognizer.membership_mode = MembershipMode::KnnSoft;
        cfg.paths.lexicon = Some("lex.txt".into());
        cfg.mfi.max_col_gap = 11;
        let back = PipelineConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn strict_parsing() {
        assert!(PipelineConfig::from_toml("[mfi]\nwindow_lenght = 3\n").is_err());
        assert!(PipelineConfig::from_toml("[mfi]\nwindow_length = 3\nwindow_length = 4\n").is_err());
        assert!(PipelineConfig::from_toml("[bogus]\n").is_err());
        assert!(PipelineConfig::from_toml("[localizer]\nthreshold = 1.5\n").is_err());
    }
}
